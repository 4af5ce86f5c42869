// Command-line front end: data generation, training, gradient checking,
// feature export, evaluation and the cross-run ordering report.

#include "mint/config.hpp"
#include "mint/evalpipe.hpp"
#include "mint/gradcheck.hpp"
#include "mint/synthgen.hpp"
#include "mint/trainer.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace mint;

namespace {

// Relative data paths resolve against MINT_DATA_ROOT when it is set.
std::string resolve_data_path(const std::string& path) {
    if (fs::path(path).is_absolute() || fs::exists(path)) return path;
    const char* root = std::getenv("MINT_DATA_ROOT");
    if (root && *root) {
        fs::path joined = fs::path(root) / path;
        if (fs::exists(joined)) return joined.string();
    }
    return path;
}

int run_gen_data(const std::string& config_path, const std::string& out_dir) {
    synth::DatasetSpec spec;
    synth::SynthConfig cfg = synth_config_from_json(read_text_file(config_path), &spec);
    fs::create_directories(out_dir);
    auto [train_path, eval_path] = synth::write_dataset(cfg, spec, out_dir);
    // Effective config echo for provenance.
    write_text_file((fs::path(out_dir) / "gen_config.json").string(), synth_config_to_json(cfg, spec));
    std::cout << json{{"event", "gen-data"},
                      {"train_manifest", train_path},
                      {"eval_manifest", eval_path},
                      {"config_hash", to_hex(fnv1a64(synth_config_to_json(cfg, spec)))}}
                     .dump()
              << "\n";
    return 0;
}

int run_train(TrainConfig cfg, const std::string& data_path, const std::string& out_dir,
              const std::string& init_ckpt, bool quiet) {
    DatasetManifest manifest = load_manifest(resolve_data_path(data_path));
    require(manifest.split == "train", "train expects a train-split manifest");
    LoadedDataset data = load_dataset(manifest, cfg.hvg_k);

    Backbone<float> base;
    if (!init_ckpt.empty()) {
        TrainState<float> init_state = load_checkpoint<float>(resolve_data_path(init_ckpt));
        require(!init_state.student.backbone.cfg.has_st_token,
                "--init expects a pretrain checkpoint (base backbone without the ST token)");
        require(init_state.cfg.backbone.image_size == cfg.backbone.image_size &&
                    init_state.cfg.backbone.embed_dim == cfg.backbone.embed_dim &&
                    init_state.cfg.backbone.depth == cfg.backbone.depth,
                "--init backbone geometry does not match the train config");
        base = init_state.student.backbone;
    } else {
        base.setup(cfg.backbone, cfg.seed);
    }

    TrainState<float> state = init_train(base, cfg);
    bind_vocab(state, data.vocab.genes.size(), data.vocab.xenium_genes.size());

    fs::create_directories(out_dir);
    write_text_file((fs::path(out_dir) / "config.json").string(), train_config_to_json(cfg));

    for (int64_t it = 0; it < cfg.iterations; ++it) {
        LossRecord rec = train_step(state, data);
        if (!quiet)
            std::cout << json{{"step", rec.step},   {"lr", rec.lr},         {"m", rec.ema_m},
                              {"l_dino", rec.l_dino}, {"l_distill", rec.l_distill}, {"l_st", rec.l_st},
                              {"l_pst", rec.l_pst},   {"total", rec.total}}
                             .dump()
                      << "\n";
        if (cfg.checkpoint_every > 0 && rec.step % cfg.checkpoint_every == 0 && rec.step < cfg.iterations) {
            char name[64];
            std::snprintf(name, sizeof(name), "ckpt_step%06lld.bin", static_cast<long long>(rec.step));
            save_checkpoint(state, (fs::path(out_dir) / name).string());
        }
    }
    std::string final_path = (fs::path(out_dir) / "ckpt_final.bin").string();
    save_checkpoint(state, final_path);
    std::cout << json{{"event", "train-done"},
                      {"steps", state.step},
                      {"checkpoint", final_path},
                      {"mode", train_mode_name(cfg.mode)}}
                     .dump()
              << "\n";
    return 0;
}

int cmd_gradcheck(uint64_t seed) {
    GradcheckReport report = mint::run_gradcheck(seed);
    for (const auto& row : report.rows)
        std::cout << json{{"loss", row.loss}, {"max_rel_err", row.max_rel_err}}.dump() << "\n";
    std::cout << json{{"linearity_rel_err", report.linearity_err}}.dump() << "\n";
    bool ok = report.pass(1e-4);
    std::cout << json{{"event", "gradcheck"}, {"pass", ok}}.dump() << "\n";
    return ok ? 0 : 2;
}

std::vector<const SpotSample*> spot_pointers(const LoadedDataset& data) {
    std::vector<const SpotSample*> out;
    out.reserve(data.spots.size());
    for (const auto& s : data.spots) out.push_back(&s);
    return out;
}

int run_features(const std::string& ckpt_path, const std::string& data_path, const std::string& out_path,
                 const std::string& encoder, const std::string& variant) {
    TrainState<float> state = load_checkpoint<float>(resolve_data_path(ckpt_path));
    DatasetManifest manifest = load_manifest(resolve_data_path(data_path));
    LoadedDataset data = load_dataset(manifest, state.cfg.hvg_k);
    require(!data.spots.empty(), "feature extraction needs spot samples");

    const bool ablation_mask = state.cfg.mode == TrainMode::StOnCls ||
                               state.cfg.mode == TrainMode::StOnClsNoDistill;
    std::vector<eval::FeatureRecord> records;
    if (encoder == "student")
        records = eval::extract_features(state.student.backbone, spot_pointers(data), ablation_mask);
    else if (encoder == "teacher")
        records = eval::extract_features(state.teacher.backbone, spot_pointers(data), ablation_mask);
    else if (encoder == "frozen")
        records = eval::extract_features(state.frozen, spot_pointers(data), false);
    else
        throw ValidationError("unknown encoder: " + encoder);

    const Index n = static_cast<Index>(records.size());
    const bool has_st = !records.empty() && records.front().has_st;

    ArrayArchive a;
    std::string ids;
    Mat z_cls(n, records.front().z_cls.size());
    Mat z_st;
    if (has_st) z_st.resize(n, records.front().z_st.size());
    for (Index i = 0; i < n; ++i) {
        ids += records[static_cast<size_t>(i)].sample_id + "\n";
        z_cls.row(i) = records[static_cast<size_t>(i)].z_cls.transpose();
        if (has_st) z_st.row(i) = records[static_cast<size_t>(i)].z_st.transpose();
    }
    a.put_text("sample_ids", ids);
    a.put_f64("z_cls", z_cls);
    if (has_st) a.put_f64("z_st", z_st);
    json meta{{"encoder", encoder},
              {"mode", train_mode_name(state.cfg.mode)},
              {"step", state.step},
              {"config_hash", to_hex(fnv1a64(train_config_to_json(state.cfg)))}};
    a.put_text("meta/provenance", meta.dump(2));

    if (variant != "records") {
        eval::Variant v = eval::variant_from_name(variant);
        Mat feats(n, eval::representation_variant(records.front(), v).size());
        for (Index i = 0; i < n; ++i)
            feats.row(i) = eval::representation_variant(records[static_cast<size_t>(i)], v).transpose();
        a.put_f64("features/" + variant, feats);
    }
    a.save(out_path);
    std::cout << json{{"event", "features"}, {"count", n}, {"has_st", has_st}, {"out", out_path}}.dump()
              << "\n";
    return 0;
}

int run_eval(const std::string& features_path, const std::string& data_path, const std::string& out_path,
             const EvalProtocolConfig& protocol, const std::vector<std::string>& variants, bool probe) {
    ArrayArchive a = ArrayArchive::load(resolve_data_path(features_path));
    DatasetManifest manifest = load_manifest(resolve_data_path(data_path));
    LoadedDataset data = load_dataset(manifest, 8);

    std::map<std::string, const SpotSample*> by_id;
    for (const auto& s : data.spots) by_id[s.id] = &s;

    std::vector<std::string> ids;
    {
        std::string blob = a.get_text("sample_ids");
        size_t start = 0;
        while (start < blob.size()) {
            size_t end = blob.find('\n', start);
            if (end == std::string::npos) break;
            ids.push_back(blob.substr(start, end - start));
            start = end + 1;
        }
    }
    Mat z_cls = a.get_f64("z_cls");
    bool has_st = a.has("z_st");
    Mat z_st = has_st ? a.get_f64("z_st") : Mat();
    require(static_cast<Index>(ids.size()) == z_cls.rows(), "sample_ids/z_cls row mismatch");

    Mat expression(z_cls.rows(), data.vocab.genes.size());
    std::vector<int> labels;
    bool have_labels = true;
    for (Index i = 0; i < z_cls.rows(); ++i) {
        auto it = by_id.find(ids[static_cast<size_t>(i)]);
        require(it != by_id.end(), "features reference unknown sample id: " + ids[static_cast<size_t>(i)]);
        expression.row(i) = it->second->expression.transpose();
        if (it->second->truth_dominant_type < 0) have_labels = false;
        labels.push_back(it->second->truth_dominant_type);
    }

    json out;
    out["schema_version"] = 1;
    out["protocol"] = json::parse(eval_protocol_to_json(protocol));
    out["n_samples"] = z_cls.rows();
    out["variants"] = json::object();

    for (const std::string& vname : variants) {
        eval::Variant v = eval::variant_from_name(vname);
        if (!has_st && v != eval::Variant::Cls) continue;
        Mat feats;
        switch (v) {
            case eval::Variant::Cls: feats = z_cls; break;
            case eval::Variant::St: feats = z_st; break;
            case eval::Variant::Sum: feats = z_cls + z_st; break;
            case eval::Variant::Concat:
                feats.resize(z_cls.rows(), z_cls.cols() + z_st.cols());
                feats << z_cls, z_st;
                break;
        }
        auto res = eval::benchmark_expression(feats, expression, protocol.benchmark);
        json jv{{"mean_pearson", res.mean_pearson},
                {"per_gene_pearson", res.per_gene_pearson},
                {"degenerate", res.degenerate}};
        if (probe && have_labels)
            jv["probe_accuracy"] = eval::morphology_probe(feats, labels, protocol.probe);
        out["variants"][vname] = jv;
    }

    write_text_file(out_path, out.dump(2) + "\n");

    // Per-variant summary table, delimiter-separated.
    std::string table = "variant,mean_pearson,probe_accuracy\n";
    for (auto& [k, v] : out["variants"].items()) {
        table += k + "," + std::to_string(v["mean_pearson"].get<double>()) + ",";
        table += v.contains("probe_accuracy") ? std::to_string(v["probe_accuracy"].get<double>()) : "";
        table += "\n";
    }
    write_text_file(out_path + ".csv", table);
    std::cout << json{{"event", "eval"}, {"out", out_path}}.dump() << "\n";
    return 0;
}

json load_report(const std::string& path) {
    return json::parse(read_text_file(resolve_data_path(path)));
}

int run_report(const std::string& mint_path, const std::string& frozen_path,
               const std::string& distill_path, const std::string& nodistill_path,
               const std::string& out_path, double concat_margin, double preserve_margin) {
    json mint_report = load_report(mint_path);
    json frozen_report = load_report(frozen_path);

    auto expr_of = [](const json& r, const std::string& v) {
        return r.at("variants").at(v).at("mean_pearson").get<double>();
    };
    auto probe_of = [](const json& r, const std::string& v) {
        return r.at("variants").at(v).at("probe_accuracy").get<double>();
    };

    eval::OrderingInputs in;
    in.expr_cls = expr_of(mint_report, "cls");
    in.expr_st = expr_of(mint_report, "st");
    in.expr_sum = expr_of(mint_report, "sum");
    in.expr_concat = expr_of(mint_report, "concat");
    in.probe_cls = probe_of(mint_report, "cls");
    in.probe_st = probe_of(mint_report, "st");
    in.probe_sum = probe_of(mint_report, "sum");
    in.probe_concat = probe_of(mint_report, "concat");
    in.expr_frozen = expr_of(frozen_report, "cls");
    in.probe_frozen = probe_of(frozen_report, "cls");

    eval::OrderingVerdicts v = eval::ordering_report(in, concat_margin, preserve_margin);
    json out;
    out["schema_version"] = 1;
    out["inputs"] = {{"expr", {{"cls", in.expr_cls}, {"st", in.expr_st}, {"sum", in.expr_sum},
                               {"concat", in.expr_concat}, {"frozen_cls", *in.expr_frozen}}},
                     {"probe", {{"cls", in.probe_cls}, {"st", in.probe_st}, {"sum", in.probe_sum},
                                {"concat", in.probe_concat}, {"frozen_cls", *in.probe_frozen}}}};
    out["verdicts"] = {{"specialization", v.specialization},
                       {"sum_beats_cls", v.sum_beats_cls},
                       {"concat_best", v.concat_best},
                       {"cls_preserved", v.cls_preserved},
                       {"all_true", v.all_true()}};

    // Forgetting comparison across the CLS-supervision ablations.
    if (!distill_path.empty() && !nodistill_path.empty()) {
        json ja = load_report(nodistill_path);
        json jb = load_report(distill_path);
        double frozen_probe = *in.probe_frozen;
        double nodistill_probe = probe_of(ja, "cls");
        double distill_probe = probe_of(jb, "cls");
        double drop = frozen_probe - nodistill_probe;
        double recovered = drop > 0 ? (distill_probe - nodistill_probe) / drop : 0.0;
        out["forgetting"] = {{"frozen_probe", frozen_probe},
                             {"no_distill_probe", nodistill_probe},
                             {"distill_probe", distill_probe},
                             {"mint_cls_probe", in.probe_cls},
                             {"drop", drop},
                             {"recovered_frac", recovered},
                             {"verdicts",
                              {{"forgetting_observed", drop >= 0.02},
                               {"distill_recovers_half", distill_probe >= nodistill_probe + 0.5 * drop},
                               {"mint_cls_preserved", frozen_probe - in.probe_cls <= preserve_margin}}}};
    }
    write_text_file(out_path, out.dump(2) + "\n");
    std::cout << out.dump() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"MINT desk-scale training and evaluation pipeline"};
    app.require_subcommand(1);

    // gen-data
    auto* gen = app.add_subcommand("gen-data", "Generate a synthetic paired dataset");
    std::string gen_config, gen_out;
    gen->add_option("--config", gen_config, "generator config JSON")->required();
    gen->add_option("--out", gen_out, "output dataset directory")->required();

    // train
    auto* train = app.add_subcommand("train", "Run the fine-tuning loop");
    std::string train_config_path, train_data, train_out, train_init, train_mode;
    bool quiet = false, serial = false;
    std::optional<int64_t> train_iters;
    std::optional<uint64_t> train_seed;
    std::optional<int> train_batch;
    std::optional<double> train_lr;
    train->add_option("--config", train_config_path, "train config JSON")->required();
    train->add_option("--data", train_data, "train manifest path")->required();
    train->add_option("--out", train_out, "run output directory")->required();
    train->add_option("--init", train_init, "pretrain checkpoint for the base weights");
    train->add_option("--mode", train_mode, "mint|st_on_cls|st_on_cls_no_distill|pretrain");
    train->add_option("--iterations", train_iters, "override iteration count");
    train->add_option("--seed", train_seed, "override seed");
    train->add_option("--batch-size", train_batch, "override batch size");
    train->add_option("--lr", train_lr, "override learning rate");
    train->add_flag("--quiet", quiet, "suppress per-step records");
    train->add_flag("--serial", serial, "force the bitwise-reproducible serial path (default)");

    // gradcheck
    auto* gc = app.add_subcommand("gradcheck", "Finite-difference check of all four objectives");
    uint64_t gc_seed = 0;
    gc->add_option("--seed", gc_seed, "seed for the tiny model and fixed batch");

    // features
    auto* feat = app.add_subcommand("features", "Export per-tile feature records");
    std::string f_ckpt, f_data, f_out, f_encoder = "student", f_variant = "records";
    feat->add_option("--ckpt", f_ckpt, "checkpoint file")->required();
    feat->add_option("--data", f_data, "eval manifest path")->required();
    feat->add_option("--out", f_out, "output feature archive")->required();
    feat->add_option("--encoder", f_encoder, "student|teacher|frozen");
    feat->add_option("--variant", f_variant, "records|cls|st|sum|concat");

    // eval
    auto* ev = app.add_subcommand("eval", "PCA+Ridge expression benchmark and morphology probe");
    std::string e_features, e_data, e_out, e_protocol;
    std::vector<std::string> e_variants{"cls", "st", "sum", "concat"};
    bool e_probe = true;
    std::optional<Index> e_npca, e_nhvg;
    std::optional<double> e_alpha;
    std::optional<uint64_t> e_split_seed;
    ev->add_option("--features", e_features, "feature archive")->required();
    ev->add_option("--data", e_data, "eval manifest path")->required();
    ev->add_option("--out", e_out, "output report JSON")->required();
    ev->add_option("--protocol", e_protocol, "protocol config JSON");
    ev->add_option("--variants", e_variants, "representation variants to evaluate");
    ev->add_option("--n-pca", e_npca, "override PCA component count");
    ev->add_option("--alpha", e_alpha, "override ridge alpha");
    ev->add_option("--n-eval-hvg", e_nhvg, "override evaluation HVG count");
    ev->add_option("--split-seed", e_split_seed, "override split seed");
    ev->add_flag("!--no-probe", e_probe, "skip the morphology probe");

    // report
    auto* rep = app.add_subcommand("report", "Ordering and forgetting verdicts across runs");
    std::string r_mint, r_frozen, r_distill, r_nodistill, r_out;
    double r_concat_margin = 0.005, r_preserve_margin = 0.01;
    rep->add_option("--mint", r_mint, "MINT eval report")->required();
    rep->add_option("--frozen", r_frozen, "frozen-baseline eval report")->required();
    rep->add_option("--ablation-distill", r_distill, "L_ST-on-CLS + distill eval report");
    rep->add_option("--ablation-no-distill", r_nodistill, "L_ST-on-CLS w/o distill eval report");
    rep->add_option("--out", r_out, "output verdict JSON")->required();
    rep->add_option("--concat-margin", r_concat_margin, "tie margin for the concat verdict");
    rep->add_option("--preserve-margin", r_preserve_margin, "margin for CLS preservation");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (gen->parsed()) return run_gen_data(gen_config, gen_out);
        if (train->parsed()) {
            TrainConfig cfg = train_config_from_json(read_text_file(resolve_data_path(train_config_path)));
            if (!train_mode.empty()) cfg.mode = train_mode_from_name(train_mode);
            if (train_iters) cfg.iterations = *train_iters;
            if (train_seed) cfg.seed = *train_seed;
            if (train_batch) cfg.batch_size = *train_batch;
            if (train_lr) cfg.lr = *train_lr;
            if (serial) cfg.serial = true;
            cfg.validate();
            return run_train(cfg, train_data, train_out, train_init, quiet);
        }
        if (gc->parsed()) return cmd_gradcheck(gc_seed);
        if (feat->parsed()) return run_features(f_ckpt, f_data, f_out, f_encoder, f_variant);
        if (ev->parsed()) {
            EvalProtocolConfig protocol;
            if (!e_protocol.empty())
                protocol = eval_protocol_from_json(read_text_file(resolve_data_path(e_protocol)));
            if (e_npca) protocol.benchmark.n_pca = *e_npca;
            if (e_alpha) protocol.benchmark.alpha = *e_alpha;
            if (e_nhvg) protocol.benchmark.n_eval_hvg = *e_nhvg;
            if (e_split_seed) {
                protocol.benchmark.split_seed = *e_split_seed;
                protocol.probe.split_seed = *e_split_seed;
            }
            return run_eval(e_features, e_data, e_out, protocol, e_variants, e_probe);
        }
        if (rep->parsed())
            return run_report(r_mint, r_frozen, r_distill, r_nodistill, r_out, r_concat_margin,
                              r_preserve_margin);
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "failure: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
