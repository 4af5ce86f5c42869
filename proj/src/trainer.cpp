#include "mint/trainer.hpp"

#include <algorithm>
#include <filesystem>

namespace fs = std::filesystem;

namespace mint {

std::string train_mode_name(TrainMode m) {
    switch (m) {
        case TrainMode::Mint: return "mint";
        case TrainMode::StOnCls: return "st_on_cls";
        case TrainMode::StOnClsNoDistill: return "st_on_cls_no_distill";
        case TrainMode::Pretrain: return "pretrain";
    }
    throw RuntimeFailure("unknown train mode");
}

TrainMode train_mode_from_name(const std::string& s) {
    if (s == "mint") return TrainMode::Mint;
    if (s == "st_on_cls") return TrainMode::StOnCls;
    if (s == "st_on_cls_no_distill") return TrainMode::StOnClsNoDistill;
    if (s == "pretrain") return TrainMode::Pretrain;
    throw ValidationError("unknown train mode: " + s);
}

LoadedDataset load_dataset(const DatasetManifest& manifest, Index hvg_k) {
    LoadedDataset out;
    out.tile_size = manifest.tile_size;
    out.vocab = load_vocab((fs::path(manifest.base_dir) / manifest.vocab_path).string());

    for (const auto& e : manifest.entries) {
        std::string full = (fs::path(manifest.base_dir) / e.sample_path).string();
        if (e.modality == Modality::Spot) {
            SpotSample s = load_spot_sample(full);
            s.validate(out.vocab.genes.size(), manifest.tile_size);
            out.spots.push_back(std::move(s));
        } else {
            XeniumSample s = load_xenium_sample(full);
            s.validate(out.vocab.xenium_genes.size(), manifest.tile_size);
            out.xeniums.push_back(std::move(s));
        }
    }

    // Per-slide measured sets and HVG lists for the Eq.3 gene selection.
    std::map<std::string, std::vector<const SpotSample*>> by_slide;
    for (const auto& s : out.spots) by_slide[s.slide_id].push_back(&s);
    for (auto& [slide, samples] : by_slide) {
        SlideInfo info;
        const std::vector<uint8_t>& measured = samples.front()->measured;
        for (const auto* s : samples)
            require(s->measured == measured, "slide " + slide + " has inconsistent measured masks");
        for (Index g = 0; g < static_cast<Index>(measured.size()); ++g)
            if (measured[static_cast<size_t>(g)]) info.measured.push_back(g);

        if (samples.size() >= 2) {
            Mat expr(static_cast<Index>(samples.size()), out.vocab.genes.size());
            for (size_t i = 0; i < samples.size(); ++i)
                expr.row(static_cast<Index>(i)) = samples[i]->expression.transpose();
            Index k = std::min<Index>(hvg_k, static_cast<Index>(info.measured.size()));
            info.hvg = compute_hvg(expr, measured, k);
        } else {
            info.hvg = info.measured;  // single-spot slide, nothing to rank
        }
        out.slide_info[slide] = std::move(info);
    }
    return out;
}

std::vector<std::pair<bool, size_t>> build_batch(size_t n_spot, size_t n_xenium, int oversample,
                                                 int batch_size, Rng& rng) {
    require(n_spot + n_xenium > 0, "cannot sample from an empty manifest");
    require(oversample >= 1, "oversample factor must be >= 1");
    const uint64_t total = n_spot + static_cast<uint64_t>(oversample) * n_xenium;
    std::vector<std::pair<bool, size_t>> out;
    out.reserve(static_cast<size_t>(batch_size));
    for (int i = 0; i < batch_size; ++i) {
        uint64_t u = rng.uniform_index(total);
        if (u < n_spot)
            out.emplace_back(true, static_cast<size_t>(u));
        else
            out.emplace_back(false, static_cast<size_t>((u - n_spot) / static_cast<uint64_t>(oversample)));
    }
    return out;
}

}  // namespace mint
