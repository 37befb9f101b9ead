#pragma once

#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace snipcorr::manifest {

std::string sha256_hex(std::string_view data);

// Run manifest kept at <run dir>/manifest.json. Artifacts are recorded per
// stage as run-relative paths with their SHA-256; later stages read inputs
// through read_verified and refuse anything whose bytes no longer match.
class Manifest {
public:
    // Starts a fresh manifest bound to config_hash (previous contents dropped).
    static Manifest create(const std::string& run_dir, const std::string& config_hash);
    // Loads an existing manifest; throws IntegrityError when it was written
    // for a different configuration.
    static Manifest open(const std::string& run_dir, const std::string& config_hash);

    const std::string& run_dir() const { return run_dir_; }
    std::string path_of(const std::string& rel) const;

    // Drops every artifact and value of the stage; called when a stage reruns.
    void begin_stage(const std::string& stage);
    void finish_stage(const std::string& stage);
    bool has_stage(const std::string& stage) const;

    // Writes contents atomically and records its hash under the stage.
    void write_artifact(const std::string& stage, const std::string& rel, const std::string& contents);
    void record(const std::string& stage, const std::string& rel, const std::string& hash);
    std::optional<std::string> hash_of(const std::string& rel) const;

    // File contents, checked against the recorded hash.
    std::string read_verified(const std::string& rel) const;

    void set_value(const std::string& stage, const std::string& key, nlohmann::json value);
    std::optional<nlohmann::json> value(const std::string& stage, const std::string& key) const;

    void save() const;
    const nlohmann::json& document() const { return doc_; }

private:
    std::string run_dir_;
    nlohmann::json doc_;
};

}  // namespace snipcorr::manifest
