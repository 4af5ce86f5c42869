#pragma once

#include "mint/evalpipe.hpp"
#include "mint/synthgen.hpp"
#include "mint/trainer.hpp"

#include <string>

namespace mint {

// Strict parsers: unknown keys are hard errors so a typo in a weight or
// probability cannot silently invalidate a run. Every file carries a
// schema_version field.

synth::SynthConfig synth_config_from_json(const std::string& text, synth::DatasetSpec* dataset_out);
std::string synth_config_to_json(const synth::SynthConfig& cfg, const synth::DatasetSpec& spec);

struct EvalProtocolConfig {
    eval::BenchmarkProtocol benchmark;
    eval::ProbeProtocol probe;
};

EvalProtocolConfig eval_protocol_from_json(const std::string& text);
std::string eval_protocol_to_json(const EvalProtocolConfig& cfg);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace mint
