#include "gibbslab/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <openssl/evp.h>

#include "gibbslab/errors.hpp"

#ifndef GIBBSLAB_VERSION
#define GIBBSLAB_VERSION "unknown"
#endif

namespace gibbslab::io {

json default_config() {
    return json::parse(R"({
      "group": {"name": "genus2", "ell": 3.0, "generators": null, "relator": null},
      "potential": {"kind": "bump", "amplitude": 0.5, "width": 0.8, "constant": 0.0,
                    "table": [], "table_step": 0.1},
      "ball": {"radius": 8.0, "dedup_tol": 1e-8, "max_nodes": 6000000},
      "thermo": {"s_offset": 0.05, "quad_step": 0.05, "T_max": 6.0, "truncation_T": 20.0},
      "shadow": {"R": 4.0, "points_radius": 6.0, "xi_per_point": 5},
      "maximal": {"depth_max": 10.0, "step": 0.25, "alphas": [2, 4, 8, 16], "pairs": 20},
      "borel": {"xi": [1.0471975511965976, 2.0, 4.5], "depths": [1, 2, 3, 4, 5, 6]},
      "density": {"a": 1.0, "b": 1.0, "k": 1},
      "fatou": {"xi_samples": 50, "lateral_r": 1.0, "shadow_R": 4.0, "min_atoms": 30, "depth_step": 1.0,
                "depth_max": 12.0, "singular_atoms": [2.0]},
      "key_inequality": {"pairs": 20, "z_depth": 6.0},
      "harnack": {"radii": [0.1, 0.5, 1.0], "samples": 100},
      "uniqueness": {"pairs": 10, "candidate_radius": 4.0, "rebase_generator": 0},
      "suspension": {"stretch": 2.0, "generators": null, "radii": [6.0, 7.0, 8.0], "bins": 768,
                     "weights": "exp", "gamma_index": 0,
                     "x_list": [[0.3, 0.2], [2.0, 4.0], [1.2, 1.0], [3.0, 5.5]]},
      "geometry": {"samples": 2000, "R": 4.0},
      "tolerances": {"pressure_cross": 0.2, "equivariance": 0.15, "fatou_rel": 0.1, "fatou_pass": 0.9,
                     "singular_growth": 10.0, "stability_ratio": 2.0, "relator": 1e-8},
      "seed": 1,
      "output": "gibbslab_out"
    })");
}

json merge_config(const json& base, const json& user) {
    if (!user.is_object()) throw DomainError("config must be a JSON object");
    json out = base;
    for (auto it = user.begin(); it != user.end(); ++it) {
        if (!out.contains(it.key())) throw DomainError("unknown config key: " + it.key());
        json& slot = out[it.key()];
        if (slot.is_object() && it.value().is_object())
            slot = merge_config(slot, it.value());
        else
            slot = it.value();
    }
    return out;
}

void apply_override(json& cfg, const std::string& dotted, const std::string& value) {
    json* node = &cfg;
    std::stringstream ss(dotted);
    std::string part;
    std::vector<std::string> parts;
    while (std::getline(ss, part, '.')) parts.push_back(part);
    if (parts.empty()) throw DomainError("empty override key");
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (!node->is_object() || !node->contains(parts[i])) throw DomainError("unknown config key: " + dotted);
        node = &(*node)[parts[i]];
    }
    json v = json::parse(value, nullptr, false);
    *node = v.is_discarded() ? json(value) : v;
}

namespace {

double number(const json& cfg, const std::string& section, const std::string& key) {
    const json& v = cfg.at(section).at(key);
    if (!v.is_number()) throw DomainError(section + "." + key + " must be a number");
    return v.get<double>();
}

void positive(const json& cfg, const std::string& section, const std::string& key) {
    if (!(number(cfg, section, key) > 0.0)) throw DomainError(section + "." + key + " must be > 0");
}

}  // namespace

void validate_config(const json& cfg) {
    const std::string group = cfg.at("group").at("name").get<std::string>();
    if (group != "genus2" && group != "schottky" && group != "custom")
        throw DomainError("group.name must be genus2, schottky or custom");
    if (group == "custom" && !cfg.at("group").at("generators").is_array())
        throw DomainError("group.generators required for a custom group");
    const std::string kind = cfg.at("potential").at("kind").get<std::string>();
    if (kind != "zero" && kind != "constant" && kind != "bump" && kind != "table")
        throw DomainError("potential.kind must be zero, constant, bump or table");
    positive(cfg, "ball", "radius");
    positive(cfg, "ball", "dedup_tol");
    positive(cfg, "thermo", "s_offset");
    positive(cfg, "thermo", "quad_step");
    positive(cfg, "thermo", "T_max");
    positive(cfg, "thermo", "truncation_T");
    positive(cfg, "shadow", "R");
    positive(cfg, "shadow", "points_radius");
    positive(cfg, "maximal", "depth_max");
    positive(cfg, "maximal", "step");
    positive(cfg, "fatou", "lateral_r");
    positive(cfg, "fatou", "shadow_R");
    positive(cfg, "fatou", "depth_step");
    positive(cfg, "fatou", "depth_max");
    positive(cfg, "key_inequality", "z_depth");
    positive(cfg, "suspension", "stretch");
    positive(cfg, "geometry", "R");
    for (auto it = cfg.at("tolerances").begin(); it != cfg.at("tolerances").end(); ++it)
        if (!it.value().is_number() || !(it.value().get<double>() > 0.0))
            throw DomainError("tolerances." + it.key() + " must be > 0");
    for (const char* section : {"maximal", "key_inequality", "uniqueness"})
        if (cfg.at(section).at("pairs").get<int>() < 1) throw DomainError(std::string(section) + ".pairs must be >= 1");
    if (cfg.at("fatou").at("xi_samples").get<int>() < 1) throw DomainError("fatou.xi_samples must be >= 1");
    if (cfg.at("harnack").at("samples").get<int>() < 1) throw DomainError("harnack.samples must be >= 1");
    if (cfg.at("geometry").at("samples").get<int>() < 1) throw DomainError("geometry.samples must be >= 1");
    if (cfg.at("suspension").at("radii").size() < 2) throw DomainError("suspension.radii needs >= 2 entries");
    if (cfg.at("suspension").at("x_list").size() < 2) throw DomainError("suspension.x_list needs >= 2 entries");
    if (!cfg.at("seed").is_number_integer() || cfg.at("seed").get<long long>() < 0)
        throw DomainError("seed must be a nonnegative integer");
    if (!cfg.at("output").is_string()) throw DomainError("output must be a path");
}

std::string sha256_hex(const std::string& bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256 failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

std::string file_sha256(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return sha256_hex(ss.str());
}

std::string config_hash(const json& cfg) { return sha256_hex(cfg.dump()); }

std::string format_double(double v) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

Artifacts::Artifacts(std::filesystem::path dir, std::string config_hash)
    : dir_(std::move(dir)), hash_(std::move(config_hash)) {
    std::filesystem::create_directories(dir_);
}

void Artifacts::record_file(const std::string& name) {
    const std::string digest = file_sha256(dir_ / name);
    for (auto& f : files_)
        if (f.first == name) {
            f.second = digest;
            return;
        }
    files_.emplace_back(name, digest);
}

void Artifacts::write_json(const std::string& name, json report) {
    report["config_hash"] = hash_;
    std::ofstream out(dir_ / name, std::ios::binary);
    out << report.dump(2) << '\n';
    out.close();
    if (!out) throw std::runtime_error("cannot write " + name);
    record_file(name);
}

void Artifacts::write_csv(const std::string& name, const std::vector<std::string>& header,
                          const std::vector<std::vector<std::string>>& rows) {
    std::ofstream out(dir_ / name, std::ios::binary);
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
        out << '\n';
    };
    line(header);
    for (const auto& r : rows) line(r);
    out.close();
    if (!out) throw std::runtime_error("cannot write " + name);
    record_file(name);
}

void Artifacts::record_stage(const std::string& stage, double seconds) { stages_.emplace_back(stage, seconds); }

json Artifacts::manifest(const std::string& subcommand, const json& extra) const {
    json m;
    m["subcommand"] = subcommand;
    m["config_hash"] = hash_;
    m["code_version"] = GIBBSLAB_VERSION;
    json files = json::array();
    for (const auto& [name, digest] : files_) files.push_back({{"file", name}, {"sha256", digest}});
    m["files"] = files;
    json stages = json::array();
    for (const auto& [name, sec] : stages_) stages.push_back({{"stage", name}, {"seconds", sec}});
    m["stages"] = stages;
    for (auto it = extra.begin(); it != extra.end(); ++it) m[it.key()] = it.value();
    return m;
}

std::filesystem::path Artifacts::write_manifest(const std::string& subcommand, const json& extra) const {
    const auto path = dir_ / ("manifest_" + subcommand + ".json");
    std::ofstream out(path, std::ios::binary);
    out << manifest(subcommand, extra).dump(2) << '\n';
    if (!out) throw std::runtime_error("cannot write manifest");
    return path;
}

}  // namespace gibbslab::io
