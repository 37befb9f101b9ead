#include "snipcorr/manifest.hpp"

#include <array>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <memory>

#include <openssl/evp.h>

#include "snipcorr/csv.hpp"
#include "snipcorr/error.hpp"
#include "snipcorr/version.hpp"

namespace snipcorr::manifest {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kFileName = "manifest.json";

std::string utc_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace

std::string sha256_hex(std::string_view data) {
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1 ||
        EVP_DigestFinal_ex(ctx.get(), md.data(), &len) != 1)
        throw IoError("sha256 failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string out(2 * len, '0');
    for (unsigned int i = 0; i < len; ++i) {
        out[2 * i] = hex[md[i] >> 4];
        out[2 * i + 1] = hex[md[i] & 0xf];
    }
    return out;
}

Manifest Manifest::create(const std::string& run_dir, const std::string& config_hash) {
    std::error_code ec;
    fs::create_directories(run_dir, ec);
    if (ec) throw IoError("cannot create run directory " + run_dir + ": " + ec.message());
    Manifest m;
    m.run_dir_ = run_dir;
    m.doc_ = json{{"format", "snipcorr-manifest"},
                  {"version", 1},
                  {"library_version", kVersion},
                  {"config_hash", config_hash},
                  {"created", utc_now()},
                  {"stages", json::object()}};
    m.save();
    return m;
}

Manifest Manifest::open(const std::string& run_dir, const std::string& config_hash) {
    const std::string path = (fs::path(run_dir) / kFileName).string();
    if (!fs::exists(path)) throw IoError("no manifest in " + run_dir + "; run `generate` first");
    Manifest m;
    m.run_dir_ = run_dir;
    try {
        m.doc_ = json::parse(csv::read_file(path));
    } catch (const json::exception& e) {
        throw IntegrityError("unreadable manifest " + path + ": " + e.what());
    }
    if (m.doc_.value("format", "") != "snipcorr-manifest") throw IntegrityError(path + " is not a run manifest");
    if (m.doc_.value("config_hash", "") != config_hash)
        throw IntegrityError("configuration differs from the one recorded in " + path);
    return m;
}

std::string Manifest::path_of(const std::string& rel) const {
    return (fs::path(run_dir_) / rel).string();
}

void Manifest::begin_stage(const std::string& stage) {
    doc_["stages"][stage] = json{{"started", utc_now()}, {"finished", nullptr},
                                 {"artifacts", json::object()}, {"values", json::object()}};
}

void Manifest::finish_stage(const std::string& stage) {
    doc_["stages"].at(stage)["finished"] = utc_now();
    save();
}

bool Manifest::has_stage(const std::string& stage) const {
    const auto& st = doc_["stages"];
    return st.contains(stage) && !st[stage]["finished"].is_null();
}

void Manifest::write_artifact(const std::string& stage, const std::string& rel, const std::string& contents) {
    const fs::path p = fs::path(run_dir_) / rel;
    std::error_code ec;
    fs::create_directories(p.parent_path(), ec);
    if (ec) throw IoError("cannot create " + p.parent_path().string() + ": " + ec.message());
    csv::write_atomic(p.string(), contents);
    record(stage, rel, sha256_hex(contents));
}

void Manifest::record(const std::string& stage, const std::string& rel, const std::string& hash) {
    doc_["stages"].at(stage)["artifacts"][rel] = hash;
}

std::optional<std::string> Manifest::hash_of(const std::string& rel) const {
    for (const auto& [name, st] : doc_["stages"].items()) {
        const auto& a = st["artifacts"];
        if (a.contains(rel)) return a[rel].get<std::string>();
    }
    return std::nullopt;
}

std::string Manifest::read_verified(const std::string& rel) const {
    const auto expected = hash_of(rel);
    if (!expected) throw IntegrityError(rel + " is not recorded in the manifest");
    const std::string contents = csv::read_file(path_of(rel));
    if (sha256_hex(contents) != *expected) throw IntegrityError(rel + " does not match its recorded hash");
    return contents;
}

void Manifest::set_value(const std::string& stage, const std::string& key, json value) {
    doc_["stages"].at(stage)["values"][key] = std::move(value);
}

std::optional<json> Manifest::value(const std::string& stage, const std::string& key) const {
    const auto& st = doc_["stages"];
    if (!st.contains(stage) || !st[stage]["values"].contains(key)) return std::nullopt;
    return std::optional<json>(std::in_place, st[stage]["values"][key]);
}

void Manifest::save() const {
    csv::write_atomic(path_of(kFileName), doc_.dump(2) + "\n");
}

}  // namespace snipcorr::manifest
