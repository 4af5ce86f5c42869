#pragma once

#include "mint/trainer.hpp"

#include <string>
#include <vector>

namespace mint {

struct GradcheckReport {
    struct Row {
        std::string loss;
        double max_rel_err = 0.0;
    };
    std::vector<Row> rows;      // dino, distill, st, pst, total
    double linearity_err = 0.0;  // combined grad vs weighted sum of parts

    bool pass(double threshold = 1e-4) const {
        for (const auto& r : rows)
            if (!(r.max_rel_err < threshold)) return false;
        return linearity_err < 1e-8;
    }
};

// Double-precision comparison of analytic gradients against central finite
// differences (h = 1e-5) on a D=8 / depth-1 / K=16 / G=4 model, per loss
// and for the weighted combination.
GradcheckReport run_gradcheck(uint64_t seed);

}  // namespace mint
