#pragma once

#include "mint/common.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace mint {

// Flat little-endian container of named n-d arrays. One format serves
// sample payloads, feature exports and model checkpoints.
//
// Layout: "MARR" magic, u32 version, u32 entry count, then per entry:
//   u32 name length, name bytes,
//   u8 dtype (0=f64 1=f32 2=i64 3=u32 4=u8), u8 ndim, u64 dims[ndim],
//   raw values, C order (row-major) for 2-d arrays.
enum class DType : uint8_t { F64 = 0, F32 = 1, I64 = 2, U32 = 3, U8 = 4 };

struct ArrayEntry {
    DType dtype = DType::F64;
    std::vector<uint64_t> shape;
    std::vector<uint8_t> raw;

    uint64_t count() const {
        uint64_t n = 1;
        for (uint64_t d : shape) n *= d;
        return n;
    }
};

class ArrayArchive {
public:
    bool has(const std::string& name) const { return entries_.count(name) != 0; }

    std::vector<std::string> names() const {
        std::vector<std::string> out;
        out.reserve(entries_.size());
        for (const auto& [k, v] : entries_) out.push_back(k);
        return out;
    }

    const ArrayEntry& entry(const std::string& name) const;

    // Scalar-typed setters/getters. Matrices are stored row-major.
    void put_f64(const std::string& name, const Mat& m);
    void put_f32(const std::string& name, const MatF& m);
    void put_f32_raw(const std::string& name, const std::vector<float>& v,
                     const std::vector<uint64_t>& shape);
    void put_vec_f64(const std::string& name, const Vec& v);
    void put_u32(const std::string& name, const std::vector<uint32_t>& v);
    void put_u8(const std::string& name, const std::vector<uint8_t>& v);
    void put_i64(const std::string& name, const std::vector<int64_t>& v);
    void put_text(const std::string& name, const std::string& text);

    Mat get_f64(const std::string& name) const;
    MatF get_f32(const std::string& name) const;
    std::vector<float> get_f32_raw(const std::string& name, std::vector<uint64_t>* shape = nullptr) const;
    Vec get_vec_f64(const std::string& name) const;
    std::vector<uint32_t> get_u32(const std::string& name) const;
    std::vector<uint8_t> get_u8(const std::string& name) const;
    std::vector<int64_t> get_i64(const std::string& name) const;
    std::string get_text(const std::string& name) const;

    void save(const std::string& path) const;
    static ArrayArchive load(const std::string& path);

private:
    // std::map keeps serialization order independent of insertion order,
    // which the byte-identical reproducibility contract relies on.
    std::map<std::string, ArrayEntry> entries_;
};

}  // namespace mint
