// Copyright (C) 2026 The keyreid Authors
// SPDX-License-Identifier: Apache-2.0

#include "keyreid/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "keyreid/error.hpp"

namespace keyreid {

namespace fs = std::filesystem;

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view line, char delim) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(delim, start);
        out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

/// Non-blank lines with their 1-based line numbers.
std::vector<std::pair<std::size_t, std::string_view>> lines_of(std::string_view text) {
    std::vector<std::pair<std::size_t, std::string_view>> out;
    std::size_t number = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto pos = text.find('\n', start);
        const auto line = text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start);
        ++number;
        if (!trim(line).empty()) out.emplace_back(number, line);
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

std::optional<double> to_double(std::string_view s) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
    return v;
}

template <typename Int>
std::optional<Int> to_int(std::string_view s) {
    Int v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
    return v;
}

std::string shortest(double v) { return fmt::format("{}", v); }

}  // namespace

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(fmt::format("cannot open '{}'", path.string()));
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_file(const fs::path& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(fmt::format("cannot write '{}'", path.string()));
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError(fmt::format("failed writing '{}'", path.string()));
}

// ---------------------------------------------------------------------------
// Metadata

std::vector<PedestrianRecord> parse_metadata_text(std::string_view text, std::string_view source) {
    const auto lines = lines_of(text);
    if (lines.empty()) throw InputError(fmt::format("{}: missing header", source));
    const auto header = split(lines.front().second, ',');
    const std::vector<std::string_view> base = {"id", "camera", "t", "vx", "vy"};
    const bool has_truth = header.size() == 6 && header[5] == "true_match";
    if (!(header.size() == 5 || has_truth) || !std::equal(base.begin(), base.end(), header.begin())) {
        throw InputError(fmt::format("{}:{}: header must be id,camera,t,vx,vy[,true_match]", source,
                                     lines.front().first));
    }

    std::vector<PedestrianRecord> out;
    std::set<std::pair<std::string, std::string>> seen;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto [number, line] = lines[i];
        const auto fields = split(line, ',');
        if (fields.size() != header.size()) {
            throw InputError(fmt::format("{}:{}: expected {} fields, got {}", source, number, header.size(),
                                         fields.size()));
        }
        PedestrianRecord r;
        r.id = std::string(fields[0]);
        r.camera = std::string(fields[1]);
        if (r.id.empty() || r.camera.empty()) {
            throw InputError(fmt::format("{}:{}: id and camera must be non-empty", source, number));
        }
        const auto t = to_int<std::int64_t>(fields[2]);
        if (!t || *t < 0) {
            throw InputError(fmt::format("{}:{}: entering frame '{}' is not a non-negative integer", source,
                                         number, fields[2]));
        }
        r.entering_frame = *t;
        const auto vx = to_double(fields[3]);
        const auto vy = to_double(fields[4]);
        if (!vx || !vy || !std::isfinite(*vx) || !std::isfinite(*vy)) {
            throw InputError(fmt::format("{}:{}: velocity must be two finite reals", source, number));
        }
        r.velocity = {*vx, *vy};
        if (has_truth && !fields[5].empty()) r.true_match = std::string(fields[5]);
        if (!seen.emplace(r.camera, r.id).second) {
            throw InputError(fmt::format("{}:{}: duplicate id '{}' in camera '{}'", source, number, r.id, r.camera));
        }
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<PedestrianRecord> parse_metadata(const fs::path& path) {
    return parse_metadata_text(read_file(path), path.string());
}

void write_metadata(const fs::path& path, std::span<const PedestrianRecord> records) {
    std::string out = "id,camera,t,vx,vy,true_match\n";
    for (const auto& r : records) {
        out += fmt::format("{},{},{},{},{},{}\n", r.id, r.camera, r.entering_frame, shortest(r.velocity.x),
                           shortest(r.velocity.y), r.true_match.value_or(""));
    }
    write_file(path, out);
}

// ---------------------------------------------------------------------------
// Embeddings

EmbeddingTable parse_embeddings_text(std::string_view text, std::size_t expected_dim, std::string_view source) {
    const auto lines = lines_of(text);
    if (lines.empty()) throw InputError(fmt::format("{}: missing header", source));
    const auto header = split(lines.front().second, ',');
    if (header.front() != "id") {
        throw InputError(fmt::format("{}:{}: first header column must be 'id'", source, lines.front().first));
    }
    if (header.size() != expected_dim + 1) {
        throw InputError(fmt::format("{}:{}: dimension mismatch: header has {} value columns, expected {}", source,
                                     lines.front().first, header.size() - 1, expected_dim));
    }

    EmbeddingTable table;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto [number, line] = lines[i];
        const auto fields = split(line, ',');
        if (fields.size() != expected_dim + 1) {
            throw InputError(fmt::format("{}:{}: dimension mismatch: {} values, expected {}", source, number,
                                         fields.size() - 1, expected_dim));
        }
        Embedding v(expected_dim);
        for (std::size_t c = 0; c < expected_dim; ++c) {
            const auto value = to_double(fields[c + 1]);
            if (!value || !std::isfinite(*value)) {
                throw InputError(fmt::format("{}:{}: column {}: '{}' is not a finite number", source, number, c + 2,
                                             fields[c + 1]));
            }
            v[c] = *value;
        }
        if (fields[0].empty()) throw InputError(fmt::format("{}:{}: empty id", source, number));
        if (!table.emplace(std::string(fields[0]), std::move(v)).second) {
            throw InputError(fmt::format("{}:{}: duplicate id '{}'", source, number, fields[0]));
        }
    }
    return table;
}

EmbeddingTable parse_embeddings(const fs::path& path, std::size_t expected_dim) {
    return parse_embeddings_text(read_file(path), expected_dim, path.string());
}

void write_embeddings(const fs::path& path, const EmbeddingTable& table, std::size_t dim) {
    std::string out = "id";
    for (std::size_t c = 0; c < dim; ++c) out += fmt::format(",x{}", c);
    out += '\n';
    for (const auto& [id, v] : table) {
        out += id;
        for (double x : v) {
            out += ',';
            out += shortest(x);
        }
        out += '\n';
    }
    write_file(path, out);
}

// ---------------------------------------------------------------------------
// Score matrices

ScoreMatrix parse_score_matrix_text(std::string_view text, std::string_view source) {
    const auto lines = lines_of(text);
    if (lines.empty()) throw InputError(fmt::format("{}: missing header", source));
    const auto header = split(lines.front().second, ',');
    std::vector<std::string> gallery(header.begin() + 1, header.end());
    std::vector<std::string> probe;
    std::vector<double> values;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto [number, line] = lines[i];
        const auto fields = split(line, ',');
        if (fields.size() != header.size()) {
            throw InputError(fmt::format("{}:{}: expected {} fields, got {}", source, number, header.size(),
                                         fields.size()));
        }
        probe.emplace_back(fields[0]);
        for (std::size_t c = 1; c < fields.size(); ++c) {
            const auto value = to_double(fields[c]);
            if (!value || !std::isfinite(*value) || *value < 0.0) {
                throw InputError(fmt::format("{}:{}: column {}: '{}' is not a finite non-negative number", source,
                                             number, c + 1, fields[c]));
            }
            values.push_back(*value);
        }
    }
    return ScoreMatrix(std::move(probe), std::move(gallery), std::move(values));
}

ScoreMatrix parse_score_matrix(const fs::path& path) {
    return parse_score_matrix_text(read_file(path), path.string());
}

void write_score_matrix(const fs::path& path, const ScoreMatrix& matrix) {
    std::string out = "probe";
    for (const auto& g : matrix.gallery_ids()) out += "," + g;
    out += '\n';
    for (std::size_t r = 0; r < matrix.rows(); ++r) {
        out += matrix.probe_ids()[r];
        for (double v : matrix.row(r)) out += "," + shortest(v);
        out += '\n';
    }
    write_file(path, out);
}

// ---------------------------------------------------------------------------
// Key-value files

namespace {

using KeyValues = std::vector<std::tuple<std::size_t, std::string, std::string>>;

KeyValues parse_key_values(std::string_view text, std::string_view source) {
    KeyValues out;
    std::set<std::string> seen;
    for (const auto& [number, raw] : lines_of(text)) {
        std::string_view line = raw;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError(fmt::format("{}:{}: expected key=value", source, number));
        }
        std::string key(trim(line.substr(0, eq)));
        std::string value(trim(line.substr(eq + 1)));
        if (!seen.insert(key).second) throw ConfigError(fmt::format("{}:{}: duplicate key '{}'", source, number, key));
        out.emplace_back(number, std::move(key), std::move(value));
    }
    return out;
}

double config_real(std::string_view key, std::string_view value) {
    if (value == "inf") return std::numeric_limits<double>::infinity();
    const auto v = to_double(value);
    if (!v || std::isnan(*v)) throw ConfigError(fmt::format("{}: '{}' is not a number", key, value));
    return *v;
}

std::size_t config_count(std::string_view key, std::string_view value) {
    const auto v = to_int<std::size_t>(value);
    if (!v) throw ConfigError(fmt::format("{}: '{}' is not a non-negative integer", key, value));
    return *v;
}

bool config_bool(std::string_view key, std::string_view value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw ConfigError(fmt::format("{}: '{}' is not true or false", key, value));
}

DirectionMap parse_direction_map(std::string_view value) {
    DirectionMap map;
    if (value == "identity") return map;
    if (value == "negate") {
        map.mode = DirectionMap::Mode::negate;
        return map;
    }
    map.mode = DirectionMap::Mode::table;
    for (const auto entry : split(value, ',')) {
        const auto colon = entry.find(':');
        if (colon == std::string_view::npos || trim(entry.substr(0, colon)).empty() ||
            trim(entry.substr(colon + 1)).empty()) {
            throw ConfigError(fmt::format(
                "direction_map: '{}' is not identity, negate or a list of probe:gallery labels", value));
        }
        map.table.emplace_back(std::string(trim(entry.substr(0, colon))), std::string(trim(entry.substr(colon + 1))));
    }
    return map;
}

std::string format_direction_map(const DirectionMap& map) {
    switch (map.mode) {
        case DirectionMap::Mode::identity: return "identity";
        case DirectionMap::Mode::negate: return "negate";
        case DirectionMap::Mode::table: break;
    }
    std::string out;
    for (const auto& [from, to] : map.table) {
        if (!out.empty()) out += ',';
        out += from + ":" + to;
    }
    return out;
}

}  // namespace

PipelineConfig parse_config(std::string_view text, std::string_view source) {
    PipelineConfig config;
    for (const auto& [number, key, value] : parse_key_values(text, source)) {
        const auto fail = [&, number = number, &key = key](std::string_view what) {
            throw ConfigError(fmt::format("{}:{}: {}: {}", source, number, key, what));
        };
        try {
            if (key == "k_nn") {
                config.k_nn = config_count(key, value);
                if (config.k_nn < 1) fail("must be at least 1");
            } else if (key == "tau") {
                config.tau = config_real(key, value);
                if (!(config.tau >= 0.0) || !std::isfinite(config.tau)) fail("must be a finite value >= 0");
            } else if (key == "num_keys") {
                config.num_keys = config_count(key, value);
                if (config.num_keys < 1) fail("must be at least 1");
            } else if (key == "angle_threshold") {
                config.angle_threshold = config_real(key, value);
                if (!(config.angle_threshold >= 0.0 && config.angle_threshold <= 180.0)) {
                    fail("must lie in [0, 180] degrees");
                }
            } else if (key == "speed_tolerance") {
                config.speed_tolerance = config_real(key, value);
                if (!(config.speed_tolerance >= 0.0)) fail("must be >= 0");
            } else if (key == "weight_combine") {
                if (value == "min") config.weight_combine = WeightCombine::min;
                else if (value == "max") config.weight_combine = WeightCombine::max;
                else if (value == "product") config.weight_combine = WeightCombine::product;
                else fail("must be min, max or product");
            } else if (key == "baseline_feature") {
                config.baseline_feature = value;
            } else if (key.starts_with("rho.") && key.size() > 4) {
                const double rho = config_real(key, value);
                if (!(rho >= 0.0) || !std::isfinite(rho)) fail("must be a finite value >= 0");
                config.rho_per_feature[key.substr(4)] = rho;
            } else if (key == "direction_map") {
                config.direction_map = parse_direction_map(value);
            } else if (key == "seed") {
                const auto seed = to_int<std::uint64_t>(value);
                if (!seed) fail("must be an unsigned 64-bit integer");
                config.seed = *seed;
            } else if (key == "split_velocity") {
                config.split_velocity = config_bool(key, value);
            } else if (key == "saliency_scope") {
                if (value == "global") config.saliency_scope = SaliencyScope::global;
                else if (value == "subset") config.saliency_scope = SaliencyScope::subset;
                else fail("must be global or subset");
            } else {
                throw ConfigError(fmt::format("{}:{}: unknown config key '{}'", source, number, key));
            }
        } catch (const ConfigError& e) {
            const std::string what = e.what();
            if (what.starts_with(std::string(source))) throw;
            throw ConfigError(fmt::format("{}:{}: {}", source, number, what));
        }
    }
    config.validate();
    return config;
}

PipelineConfig load_config(const fs::path& path) { return parse_config(read_file(path), path.string()); }

std::string format_config(const PipelineConfig& config) {
    std::string out;
    out += fmt::format("k_nn={}\n", config.k_nn);
    out += fmt::format("tau={}\n", shortest(config.tau));
    out += fmt::format("num_keys={}\n", config.num_keys);
    out += fmt::format("angle_threshold={}\n", shortest(config.angle_threshold));
    out += fmt::format("speed_tolerance={}\n",
                       std::isinf(config.speed_tolerance) ? std::string("inf") : shortest(config.speed_tolerance));
    out += fmt::format("weight_combine={}\n", combine_name(config.weight_combine));
    if (!config.baseline_feature.empty()) out += fmt::format("baseline_feature={}\n", config.baseline_feature);
    for (const auto& [name, rho] : config.rho_per_feature) out += fmt::format("rho.{}={}\n", name, shortest(rho));
    out += fmt::format("direction_map={}\n", format_direction_map(config.direction_map));
    out += fmt::format("seed={}\n", config.seed);
    out += fmt::format("split_velocity={}\n", config.split_velocity ? "true" : "false");
    out += fmt::format("saliency_scope={}\n", scope_name(config.saliency_scope));
    return out;
}

// ---------------------------------------------------------------------------
// Bundles

namespace {

std::string metadata_file(std::string_view camera) { return fmt::format("metadata_{}.csv", camera); }

std::string embedding_file(std::string_view feature, std::string_view camera) {
    return fmt::format("embeddings_{}_{}.csv", feature, camera);
}

}  // namespace

DatasetBundle load_bundle(const fs::path& dir) {
    const fs::path manifest_path = dir / "bundle.cfg";
    std::map<std::string, std::string, std::less<>> manifest;
    for (auto& [number, key, value] : parse_key_values(read_file(manifest_path), manifest_path.string())) {
        manifest.emplace(std::move(key), std::move(value));
    }
    const auto require = [&](const std::string& key) -> const std::string& {
        auto it = manifest.find(key);
        if (it == manifest.end() || it->second.empty()) {
            throw InputError(fmt::format("{}: missing '{}'", manifest_path.string(), key));
        }
        return it->second;
    };

    DatasetBundle bundle;
    bundle.probe_camera = require("probe_camera");
    bundle.gallery_camera = require("gallery_camera");
    if (bundle.probe_camera == bundle.gallery_camera) {
        throw InputError(fmt::format("{}: probe and gallery cameras must differ", manifest_path.string()));
    }

    const auto load_records = [&](const std::string& camera) {
        auto records = parse_metadata(dir / metadata_file(camera));
        for (const auto& r : records) {
            if (r.camera != camera) {
                throw InputError(fmt::format("{}: record '{}' has camera '{}'", metadata_file(camera), r.id, r.camera));
            }
        }
        return records;
    };
    bundle.probe_records = load_records(bundle.probe_camera);
    bundle.gallery_records = load_records(bundle.gallery_camera);

    std::set<std::string> known_keys = {"probe_camera", "gallery_camera", "features", "baseline", "baseline_matrix"};
    for (const auto name : split(require("features"), ',')) {
        if (name.empty()) throw InputError(fmt::format("{}: empty feature name", manifest_path.string()));
        FeatureSpace space;
        space.name = std::string(name);
        const std::string dim_key = "dim." + space.name;
        const auto dim = to_int<std::size_t>(require(dim_key));
        if (!dim || *dim < 1) throw InputError(fmt::format("{}: {} must be a positive integer", manifest_path.string(), dim_key));
        space.dim = *dim;
        known_keys.insert(dim_key);
        const std::string metric_key = "metric." + space.name;
        if (auto it = manifest.find(metric_key); it != manifest.end()) space.metric = parse_metric(it->second);
        known_keys.insert(metric_key);
        const std::string rho_key = "rho." + space.name;
        if (auto it = manifest.find(rho_key); it != manifest.end()) {
            const auto rho = to_double(it->second);
            if (!rho || !(*rho >= 0.0) || !std::isfinite(*rho)) {
                throw InputError(fmt::format("{}: {} must be a finite value >= 0", manifest_path.string(), rho_key));
            }
            space.rho = *rho;
        }
        known_keys.insert(rho_key);
        for (const auto& camera : {bundle.probe_camera, bundle.gallery_camera}) {
            space.embeddings[camera] = parse_embeddings(dir / embedding_file(space.name, camera), space.dim);
        }
        bundle.bank.spaces.push_back(std::move(space));
    }
    bundle.bank.baseline = manifest.contains("baseline") ? manifest.at("baseline") : bundle.bank.spaces.front().name;
    if (auto it = manifest.find("baseline_matrix"); it != manifest.end() && !it->second.empty()) {
        bundle.bank.baseline_matrix = parse_score_matrix(dir / it->second);
    }
    for (const auto& [key, value] : manifest) {
        if (!known_keys.contains(key)) {
            throw InputError(fmt::format("{}: unknown key '{}'", manifest_path.string(), key));
        }
    }

    if (fs::exists(dir / "config.cfg")) {
        bundle.config = load_config(dir / "config.cfg");
        for (auto& space : bundle.bank.spaces) space.rho = bundle.config->rho_for(space);
    }
    return bundle;
}

void write_bundle(const fs::path& dir, const DatasetBundle& bundle) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError(fmt::format("cannot create '{}': {}", dir.string(), ec.message()));

    std::string manifest;
    manifest += fmt::format("probe_camera={}\n", bundle.probe_camera);
    manifest += fmt::format("gallery_camera={}\n", bundle.gallery_camera);
    std::string names;
    for (const auto& space : bundle.bank.spaces) {
        if (!names.empty()) names += ',';
        names += space.name;
    }
    manifest += fmt::format("features={}\n", names);
    manifest += fmt::format("baseline={}\n", bundle.bank.baseline);
    for (const auto& space : bundle.bank.spaces) {
        manifest += fmt::format("dim.{}={}\n", space.name, space.dim);
        manifest += fmt::format("metric.{}={}\n", space.name, metric_name(space.metric));
        manifest += fmt::format("rho.{}={}\n", space.name, shortest(space.rho));
    }
    if (bundle.bank.baseline_matrix) {
        manifest += "baseline_matrix=baseline_matrix.csv\n";
        write_score_matrix(dir / "baseline_matrix.csv", *bundle.bank.baseline_matrix);
    }
    write_file(dir / "bundle.cfg", manifest);

    write_metadata(dir / metadata_file(bundle.probe_camera), bundle.probe_records);
    write_metadata(dir / metadata_file(bundle.gallery_camera), bundle.gallery_records);
    for (const auto& space : bundle.bank.spaces) {
        for (const auto& camera : {bundle.probe_camera, bundle.gallery_camera}) {
            auto it = space.embeddings.find(camera);
            write_embeddings(dir / embedding_file(space.name, camera), it == space.embeddings.end() ? EmbeddingTable{} : it->second,
                             space.dim);
        }
    }
    if (bundle.config) write_file(dir / "config.cfg", format_config(*bundle.config));
}

}  // namespace keyreid
