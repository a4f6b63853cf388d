#pragma once

#include "csmix/sampler.hpp"
#include "csmix/types.hpp"

#include <string>

namespace csmix {

// Long-format CSV, one row per (subject, occasion, alternative):
//   subject,occasion,choice,x1..x{d_x},z1..z{d_z},alternative
// `choice` repeats the chosen alternative for the occasion. All indices are
// 1-based. A JSON sidecar (<stem>.meta.json) records n, J, d_x, d_z and the
// outside-option flag.
void write_dataset(const PanelDataset& data, const std::string& csv_path);
PanelDataset read_dataset(const std::string& csv_path);

std::string meta_path_for(const std::string& csv_path);

// truth_cs.csv: subject,category,included
void write_truth_cs(const ConsiderationState& truth, const std::string& path);
ConsiderationState read_truth_cs(const std::string& path, int n, int J);

// Full sampler state as JSON, for checkpoint/resume.
void save_sampler_state(const SamplerState& state, const std::string& path);
SamplerState load_sampler_state(const std::string& path);

}  // namespace csmix
