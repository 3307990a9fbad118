// Copyright (C) 2026 The keyreid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "keyreid/eval.hpp"
#include "keyreid/saliency.hpp"
#include "keyreid/types.hpp"

namespace keyreid {

// All files are comma-delimited UTF-8 with a mandatory header row. Fields are
// trimmed of surrounding whitespace; quoting is not supported.

/// `id,camera,t,vx,vy[,true_match]`, one record per line.
std::vector<PedestrianRecord> parse_metadata(const std::filesystem::path& path);
std::vector<PedestrianRecord> parse_metadata_text(std::string_view text, std::string_view source);
void write_metadata(const std::filesystem::path& path, std::span<const PedestrianRecord> records);

/// `id,<dim value columns>`; every value must be a finite real.
EmbeddingTable parse_embeddings(const std::filesystem::path& path, std::size_t expected_dim);
EmbeddingTable parse_embeddings_text(std::string_view text, std::size_t expected_dim, std::string_view source);
void write_embeddings(const std::filesystem::path& path, const EmbeddingTable& table, std::size_t dim);

/// Header row = gallery ids (first cell is a label), first column = probe ids.
ScoreMatrix parse_score_matrix(const std::filesystem::path& path);
ScoreMatrix parse_score_matrix_text(std::string_view text, std::string_view source);
void write_score_matrix(const std::filesystem::path& path, const ScoreMatrix& matrix);

/// `key=value` lines; `#` starts a comment. Keys: k_nn, tau, num_keys,
/// angle_threshold, speed_tolerance, weight_combine, baseline_feature,
/// rho.<feature>, direction_map, seed, split_velocity, saliency_scope.
/// Unknown keys and out-of-range values are ConfigErrors naming the key.
PipelineConfig load_config(const std::filesystem::path& path);
PipelineConfig parse_config(std::string_view text, std::string_view source);
std::string format_config(const PipelineConfig& config);

/// A dataset on disk: `bundle.cfg` names the cameras and features, and the
/// directory holds `metadata_<camera>.csv`, `embeddings_<feature>_<camera>.csv`,
/// optionally a baseline matrix and a default `config.cfg`.
struct DatasetBundle {
    std::string probe_camera;
    std::string gallery_camera;
    std::vector<PedestrianRecord> probe_records;
    std::vector<PedestrianRecord> gallery_records;
    FeatureBank bank;
    std::optional<PipelineConfig> config;
};

DatasetBundle load_bundle(const std::filesystem::path& dir);
void write_bundle(const std::filesystem::path& dir, const DatasetBundle& bundle);

// ---------------------------------------------------------------------------
// Result files. Numbers are written with six decimals.

void write_cmc_csv(const std::filesystem::path& path, const CMCCurve& curve);
void write_summary_csv(const std::filesystem::path& path, std::span<const NamedCurve> curves,
                       std::span<const std::size_t> ranks);
void write_rho_sweep_csv(const std::filesystem::path& path, std::span<const RhoSweepPoint> sweep);
void write_cmc_svg(const std::filesystem::path& path, std::span<const NamedCurve> curves);

inline constexpr std::size_t kSummaryRanks[] = {1, 5, 10, 20};

/// Writes cmc.csv (first curve), cmc_<name>.csv per curve, summary.csv,
/// cmc.svg and, when a sweep is given, rho_sweep.csv into `out_dir`.
void emit_results(const std::filesystem::path& out_dir, std::span<const NamedCurve> curves,
                  std::span<const RhoSweepPoint> sweep = {});

/// Whole file as a string; IoError when unreadable.
std::string read_file(const std::filesystem::path& path);
/// IoError when the file cannot be written.
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace keyreid
