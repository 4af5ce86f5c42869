#include "mint/config.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <set>
#include <sstream>

using json = nlohmann::ordered_json;

namespace mint {

namespace {

// Reads known keys with defaults and rejects everything else.
class StrictObj {
public:
    StrictObj(const json& j, std::string where) : j_(j), where_(std::move(where)) {
        require(j.is_object(), where_ + " must be a JSON object");
    }

    ~StrictObj() = default;

    template <typename T>
    T get(const std::string& key, T fallback) {
        seen_.insert(key);
        if (!j_.contains(key)) return fallback;
        try {
            return j_.at(key).get<T>();
        } catch (const json::exception& e) {
            throw ValidationError(where_ + "." + key + ": " + e.what());
        }
    }

    template <typename T>
    T require_get(const std::string& key) {
        seen_.insert(key);
        if (!j_.contains(key)) throw ValidationError(where_ + " is missing required key '" + key + "'");
        try {
            return j_.at(key).get<T>();
        } catch (const json::exception& e) {
            throw ValidationError(where_ + "." + key + ": " + e.what());
        }
    }

    const json* sub(const std::string& key) {
        seen_.insert(key);
        if (!j_.contains(key)) return nullptr;
        return &j_.at(key);
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (seen_.count(it.key()) == 0)
                throw ValidationError(where_ + ": unknown key '" + it.key() + "'");
    }

private:
    const json& j_;
    std::string where_;
    std::set<std::string> seen_;
};

json parse(const std::string& text, const std::string& what) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw ValidationError(what + ": JSON parse error: " + e.what());
    }
}

Mat mat_from_json(const json& j, const std::string& where) {
    require(j.is_array() && !j.empty(), where + " must be a non-empty nested array");
    Index rows = static_cast<Index>(j.size());
    Index cols = static_cast<Index>(j.at(0).size());
    Mat out(rows, cols);
    for (Index r = 0; r < rows; ++r) {
        const auto& row = j.at(static_cast<size_t>(r));
        require(static_cast<Index>(row.size()) == cols, where + " rows have inconsistent lengths");
        for (Index c = 0; c < cols; ++c) out(r, c) = row.at(static_cast<size_t>(c)).get<double>();
    }
    return out;
}

json mat_to_json(const Mat& m) {
    json out = json::array();
    for (Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        out.push_back(row);
    }
    return out;
}

}  // namespace

std::string read_text_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw RuntimeFailure("cannot write: " + path);
    out << text;
}

// ---- train config -------------------------------------------------------

std::string train_config_to_json(const TrainConfig& cfg) {
    json j;
    j["schema_version"] = 1;
    j["iterations"] = cfg.iterations;
    j["lr"] = cfg.lr;
    j["warmup_frac"] = cfg.warmup_frac;
    j["min_lr_frac"] = cfg.min_lr_frac;
    j["batch_size"] = cfg.batch_size;
    j["weights"] = {{"distill", cfg.weights.distill}, {"st", cfg.weights.st}, {"pst", cfg.weights.pst}};
    j["hvg"] = {{"k", cfg.hvg_k}, {"p_hvg", cfg.p_hvg}};
    j["ema_base"] = cfg.ema_base;
    j["xenium_oversample"] = cfg.xenium_oversample;
    j["crops"] = {{"n_global", cfg.crops.n_global},
                  {"global_size", cfg.crops.global_size},
                  {"n_local", cfg.crops.n_local},
                  {"local_size", cfg.crops.local_size}};
    j["augment"] = {{"global_scale_min", cfg.augment.global_scale_min},
                    {"global_scale_max", cfg.augment.global_scale_max},
                    {"local_scale_min", cfg.augment.local_scale_min},
                    {"local_scale_max", cfg.augment.local_scale_max},
                    {"ratio_min", cfg.augment.ratio_min},
                    {"ratio_max", cfg.augment.ratio_max},
                    {"flip_prob", cfg.augment.flip_prob},
                    {"jitter_prob", cfg.augment.jitter_prob},
                    {"brightness", cfg.augment.brightness},
                    {"contrast", cfg.augment.contrast},
                    {"saturation", cfg.augment.saturation},
                    {"blur_prob", cfg.augment.blur_prob},
                    {"blur_sigma_min", cfg.augment.blur_sigma_min},
                    {"blur_sigma_max", cfg.augment.blur_sigma_max},
                    {"disabled", cfg.augment.disabled}};
    j["mode"] = train_mode_name(cfg.mode);
    j["seed"] = cfg.seed;
    j["backbone"] = {{"image_size", cfg.backbone.image_size}, {"patch_size", cfg.backbone.patch_size},
                     {"embed_dim", cfg.backbone.embed_dim},   {"depth", cfg.backbone.depth},
                     {"n_heads", cfg.backbone.n_heads},       {"mlp_ratio", cfg.backbone.mlp_ratio},
                     {"st_pos_embed", cfg.backbone.st_pos_embed}};
    j["dino"] = {{"prototypes", cfg.dino_head.n_prototypes},
                 {"hidden", cfg.dino_head.hidden},
                 {"bottleneck", cfg.dino_head.bottleneck},
                 {"tau_student", cfg.tau_student},
                 {"tau_teacher", cfg.tau_teacher},
                 {"tau_teacher_start", cfg.tau_teacher_start},
                 {"tau_teacher_warmup_steps", cfg.tau_teacher_warmup_steps},
                 {"center_momentum", cfg.center_momentum}};
    j["optim"] = {{"beta1", cfg.adam_beta1},
                  {"beta2", cfg.adam_beta2},
                  {"eps", cfg.adam_eps},
                  {"weight_decay", cfg.weight_decay}};
    j["checkpoint_every"] = cfg.checkpoint_every;
    j["serial"] = cfg.serial;
    return j.dump(2);
}

TrainConfig train_config_from_json(const std::string& text) {
    json j = parse(text, "train config");
    StrictObj o(j, "train config");
    int schema = o.require_get<int>("schema_version");
    require(schema == 1, "unsupported train config schema_version");

    TrainConfig cfg;
    cfg.iterations = o.get<int64_t>("iterations", cfg.iterations);
    cfg.lr = o.get<double>("lr", cfg.lr);
    cfg.warmup_frac = o.get<double>("warmup_frac", cfg.warmup_frac);
    cfg.min_lr_frac = o.get<double>("min_lr_frac", cfg.min_lr_frac);
    cfg.batch_size = o.get<int>("batch_size", cfg.batch_size);
    if (const json* w = o.sub("weights")) {
        StrictObj ow(*w, "weights");
        cfg.weights.distill = ow.get<double>("distill", cfg.weights.distill);
        cfg.weights.st = ow.get<double>("st", cfg.weights.st);
        cfg.weights.pst = ow.get<double>("pst", cfg.weights.pst);
        ow.finish();
    }
    if (const json* h = o.sub("hvg")) {
        StrictObj oh(*h, "hvg");
        cfg.hvg_k = oh.get<Index>("k", cfg.hvg_k);
        cfg.p_hvg = oh.get<double>("p_hvg", cfg.p_hvg);
        oh.finish();
    }
    cfg.ema_base = o.get<double>("ema_base", cfg.ema_base);
    cfg.xenium_oversample = o.get<int>("xenium_oversample", cfg.xenium_oversample);
    if (const json* c = o.sub("crops")) {
        StrictObj oc(*c, "crops");
        cfg.crops.n_global = oc.get<int>("n_global", cfg.crops.n_global);
        cfg.crops.global_size = oc.get<int>("global_size", cfg.crops.global_size);
        cfg.crops.n_local = oc.get<int>("n_local", cfg.crops.n_local);
        cfg.crops.local_size = oc.get<int>("local_size", cfg.crops.local_size);
        oc.finish();
    }
    if (const json* a = o.sub("augment")) {
        StrictObj oa(*a, "augment");
        cfg.augment.global_scale_min = oa.get<double>("global_scale_min", cfg.augment.global_scale_min);
        cfg.augment.global_scale_max = oa.get<double>("global_scale_max", cfg.augment.global_scale_max);
        cfg.augment.local_scale_min = oa.get<double>("local_scale_min", cfg.augment.local_scale_min);
        cfg.augment.local_scale_max = oa.get<double>("local_scale_max", cfg.augment.local_scale_max);
        cfg.augment.ratio_min = oa.get<double>("ratio_min", cfg.augment.ratio_min);
        cfg.augment.ratio_max = oa.get<double>("ratio_max", cfg.augment.ratio_max);
        cfg.augment.flip_prob = oa.get<double>("flip_prob", cfg.augment.flip_prob);
        cfg.augment.jitter_prob = oa.get<double>("jitter_prob", cfg.augment.jitter_prob);
        cfg.augment.brightness = oa.get<double>("brightness", cfg.augment.brightness);
        cfg.augment.contrast = oa.get<double>("contrast", cfg.augment.contrast);
        cfg.augment.saturation = oa.get<double>("saturation", cfg.augment.saturation);
        cfg.augment.blur_prob = oa.get<double>("blur_prob", cfg.augment.blur_prob);
        cfg.augment.blur_sigma_min = oa.get<double>("blur_sigma_min", cfg.augment.blur_sigma_min);
        cfg.augment.blur_sigma_max = oa.get<double>("blur_sigma_max", cfg.augment.blur_sigma_max);
        cfg.augment.disabled = oa.get<bool>("disabled", cfg.augment.disabled);
        oa.finish();
    }
    cfg.mode = train_mode_from_name(o.get<std::string>("mode", train_mode_name(cfg.mode)));
    cfg.seed = o.get<uint64_t>("seed", cfg.seed);
    if (const json* b = o.sub("backbone")) {
        StrictObj ob(*b, "backbone");
        cfg.backbone.image_size = ob.get<int>("image_size", cfg.backbone.image_size);
        cfg.backbone.patch_size = ob.get<int>("patch_size", cfg.backbone.patch_size);
        cfg.backbone.embed_dim = ob.get<int>("embed_dim", cfg.backbone.embed_dim);
        cfg.backbone.depth = ob.get<int>("depth", cfg.backbone.depth);
        cfg.backbone.n_heads = ob.get<int>("n_heads", cfg.backbone.n_heads);
        cfg.backbone.mlp_ratio = ob.get<double>("mlp_ratio", cfg.backbone.mlp_ratio);
        cfg.backbone.st_pos_embed = ob.get<bool>("st_pos_embed", cfg.backbone.st_pos_embed);
        ob.finish();
    }
    if (const json* d = o.sub("dino")) {
        StrictObj od(*d, "dino");
        cfg.dino_head.n_prototypes = od.get<Index>("prototypes", cfg.dino_head.n_prototypes);
        cfg.dino_head.hidden = od.get<Index>("hidden", cfg.dino_head.hidden);
        cfg.dino_head.bottleneck = od.get<Index>("bottleneck", cfg.dino_head.bottleneck);
        cfg.tau_student = od.get<double>("tau_student", cfg.tau_student);
        cfg.tau_teacher = od.get<double>("tau_teacher", cfg.tau_teacher);
        cfg.tau_teacher_start = od.get<double>("tau_teacher_start", cfg.tau_teacher_start);
        cfg.tau_teacher_warmup_steps = od.get<int64_t>("tau_teacher_warmup_steps", cfg.tau_teacher_warmup_steps);
        cfg.center_momentum = od.get<double>("center_momentum", cfg.center_momentum);
        od.finish();
    }
    if (const json* op = o.sub("optim")) {
        StrictObj oo(*op, "optim");
        cfg.adam_beta1 = oo.get<double>("beta1", cfg.adam_beta1);
        cfg.adam_beta2 = oo.get<double>("beta2", cfg.adam_beta2);
        cfg.adam_eps = oo.get<double>("eps", cfg.adam_eps);
        cfg.weight_decay = oo.get<double>("weight_decay", cfg.weight_decay);
        oo.finish();
    }
    cfg.checkpoint_every = o.get<int64_t>("checkpoint_every", cfg.checkpoint_every);
    cfg.serial = o.get<bool>("serial", cfg.serial);
    o.finish();
    cfg.validate();
    return cfg;
}

// ---- synthetic generator config -----------------------------------------

synth::SynthConfig synth_config_from_json(const std::string& text, synth::DatasetSpec* dataset_out) {
    json j = parse(text, "synth config");
    StrictObj o(j, "synth config");
    int schema = o.require_get<int>("schema_version");
    require(schema == 1, "unsupported synth config schema_version");

    uint64_t seed = o.get<uint64_t>("seed", 1);
    synth::SynthConfig cfg = synth::default_config(seed);
    int n_celltypes = o.get<int>("n_celltypes", cfg.n_celltypes);
    Index genes = o.get<Index>("genes", cfg.genes);
    Index xen_genes = o.get<Index>("xenium_genes", cfg.xenium_genes);
    require(n_celltypes == cfg.n_celltypes && genes == cfg.genes && xen_genes == cfg.xenium_genes
                ? true
                : j.contains("signature_matrix"),
            "non-default world shape requires an explicit signature_matrix");
    cfg.n_celltypes = n_celltypes;
    cfg.genes = genes;
    cfg.xenium_genes = xen_genes;
    cfg.latent_dim = o.get<int>("latent_dim", cfg.latent_dim);
    cfg.tile_size = o.get<int>("tile_size", cfg.tile_size);
    cfg.transcript_rate = o.get<double>("transcript_rate", cfg.transcript_rate);
    cfg.spot_total_counts = o.get<double>("spot_total_counts", cfg.spot_total_counts);
    cfg.target_sum = o.get<double>("target_sum", cfg.target_sum);
    cfg.noise_std = o.get<double>("noise_std", cfg.noise_std);
    cfg.stripe_amp = o.get<double>("stripe_amp", cfg.stripe_amp);
    cfg.n_voronoi_sites = o.get<int>("n_voronoi_sites", cfg.n_voronoi_sites);

    if (const json* sig = o.sub("signature_matrix")) cfg.signature_matrix = mat_from_json(*sig, "signature_matrix");
    if (const json* sig = o.sub("xenium_signature")) cfg.xenium_signature = mat_from_json(*sig, "xenium_signature");
    if (j.contains("xenium_to_spot")) cfg.xenium_to_spot = o.get<std::vector<uint32_t>>("xenium_to_spot", {});
    if (const json* tex = o.sub("textures")) {
        cfg.textures.clear();
        for (const auto& t : *tex) {
            StrictObj ot(t, "texture");
            synth::TypeTexture tt;
            auto color = ot.require_get<std::vector<double>>("color");
            require(color.size() == 3, "texture color must have 3 channels");
            std::copy(color.begin(), color.end(), tt.color);
            tt.stripe_angle_deg = ot.get<double>("angle", 0.0);
            tt.stripe_period = ot.get<double>("period", 8.0);
            ot.finish();
            cfg.textures.push_back(tt);
        }
    }

    if (const json* d = o.sub("dataset")) {
        StrictObj od(*d, "dataset");
        synth::DatasetSpec spec;
        spec.n_train_spots = od.get<Index>("n_train_spots", spec.n_train_spots);
        spec.n_train_xenium = od.get<Index>("n_train_xenium", spec.n_train_xenium);
        spec.n_eval_spots = od.get<Index>("n_eval_spots", spec.n_eval_spots);
        spec.n_spot_slides = od.get<int>("n_spot_slides", spec.n_spot_slides);
        spec.n_xenium_slides = od.get<int>("n_xenium_slides", spec.n_xenium_slides);
        spec.n_eval_slides = od.get<int>("n_eval_slides", spec.n_eval_slides);
        od.finish();
        if (dataset_out) *dataset_out = spec;
    } else if (dataset_out) {
        *dataset_out = synth::DatasetSpec{};
    }
    o.finish();
    cfg.validate();
    return cfg;
}

std::string synth_config_to_json(const synth::SynthConfig& cfg, const synth::DatasetSpec& spec) {
    json j;
    j["schema_version"] = 1;
    j["seed"] = cfg.seed;
    j["n_celltypes"] = cfg.n_celltypes;
    j["latent_dim"] = cfg.latent_dim;
    j["tile_size"] = cfg.tile_size;
    j["genes"] = cfg.genes;
    j["xenium_genes"] = cfg.xenium_genes;
    j["transcript_rate"] = cfg.transcript_rate;
    j["spot_total_counts"] = cfg.spot_total_counts;
    j["target_sum"] = cfg.target_sum;
    j["noise_std"] = cfg.noise_std;
    j["stripe_amp"] = cfg.stripe_amp;
    j["n_voronoi_sites"] = cfg.n_voronoi_sites;
    j["signature_matrix"] = mat_to_json(cfg.signature_matrix);
    j["xenium_signature"] = mat_to_json(cfg.xenium_signature);
    j["xenium_to_spot"] = cfg.xenium_to_spot;
    j["textures"] = json::array();
    for (const auto& t : cfg.textures)
        j["textures"].push_back({{"color", {t.color[0], t.color[1], t.color[2]}},
                                 {"angle", t.stripe_angle_deg},
                                 {"period", t.stripe_period}});
    j["dataset"] = {{"n_train_spots", spec.n_train_spots},
                    {"n_train_xenium", spec.n_train_xenium},
                    {"n_eval_spots", spec.n_eval_spots},
                    {"n_spot_slides", spec.n_spot_slides},
                    {"n_xenium_slides", spec.n_xenium_slides},
                    {"n_eval_slides", spec.n_eval_slides}};
    return j.dump(2);
}

// ---- eval protocol -------------------------------------------------------

EvalProtocolConfig eval_protocol_from_json(const std::string& text) {
    json j = parse(text, "eval protocol");
    StrictObj o(j, "eval protocol");
    int schema = o.require_get<int>("schema_version");
    require(schema == 1, "unsupported eval protocol schema_version");
    EvalProtocolConfig cfg;
    cfg.benchmark.n_pca = o.get<Index>("n_pca", cfg.benchmark.n_pca);
    cfg.benchmark.alpha = o.get<double>("alpha", cfg.benchmark.alpha);
    cfg.benchmark.n_eval_hvg = o.get<Index>("n_eval_hvg", cfg.benchmark.n_eval_hvg);
    cfg.benchmark.split_seed = o.get<uint64_t>("split_seed", cfg.benchmark.split_seed);
    cfg.benchmark.test_frac = o.get<double>("test_frac", cfg.benchmark.test_frac);
    if (const json* p = o.sub("probe")) {
        StrictObj op(*p, "probe");
        cfg.probe.split_seed = op.get<uint64_t>("split_seed", cfg.probe.split_seed);
        cfg.probe.test_frac = op.get<double>("test_frac", cfg.probe.test_frac);
        cfg.probe.l2 = op.get<double>("l2", cfg.probe.l2);
        cfg.probe.iterations = op.get<int>("iterations", cfg.probe.iterations);
        cfg.probe.lr = op.get<double>("lr", cfg.probe.lr);
        op.finish();
    }
    o.finish();
    return cfg;
}

std::string eval_protocol_to_json(const EvalProtocolConfig& cfg) {
    json j;
    j["schema_version"] = 1;
    j["n_pca"] = cfg.benchmark.n_pca;
    j["alpha"] = cfg.benchmark.alpha;
    j["n_eval_hvg"] = cfg.benchmark.n_eval_hvg;
    j["split_seed"] = cfg.benchmark.split_seed;
    j["test_frac"] = cfg.benchmark.test_frac;
    j["probe"] = {{"split_seed", cfg.probe.split_seed},
                  {"test_frac", cfg.probe.test_frac},
                  {"l2", cfg.probe.l2},
                  {"iterations", cfg.probe.iterations},
                  {"lr", cfg.probe.lr}};
    return j.dump(2);
}

}  // namespace mint
