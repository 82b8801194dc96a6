#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace gibbslab::io {

using json = nlohmann::json;

json default_config();
// Deep merge of user over base. Keys absent from base are rejected with DomainError.
json merge_config(const json& base, const json& user);
// Sets a dotted key; value is parsed as JSON when possible, else taken as a string.
void apply_override(json& cfg, const std::string& dotted, const std::string& value);
// DomainError naming the offending key.
void validate_config(const json& cfg);

std::string sha256_hex(const std::string& bytes);
std::string file_sha256(const std::filesystem::path& p);
// Digest of the compact dump; keys are sorted so equal configs hash equally.
std::string config_hash(const json& cfg);

// Shortest round-trip decimal form.
std::string format_double(double v);

// Writes artifacts under one directory and records them for the manifest.
class Artifacts {
public:
    Artifacts(std::filesystem::path dir, std::string config_hash);

    // Adds "config_hash" to the object before writing.
    void write_json(const std::string& name, json report);
    void write_csv(const std::string& name, const std::vector<std::string>& header,
                   const std::vector<std::vector<std::string>>& rows);
    void record_stage(const std::string& stage, double seconds);
    // Manifest listing every written file with its SHA-256; the manifest itself is not listed.
    json manifest(const std::string& subcommand, const json& extra = json::object()) const;
    std::filesystem::path write_manifest(const std::string& subcommand, const json& extra = json::object()) const;

    const std::filesystem::path& dir() const { return dir_; }
    const std::string& hash() const { return hash_; }

private:
    void record_file(const std::string& name);

    std::filesystem::path dir_;
    std::string hash_;
    std::vector<std::pair<std::string, std::string>> files_;   // name, digest
    std::vector<std::pair<std::string, double>> stages_;
};

}  // namespace gibbslab::io
