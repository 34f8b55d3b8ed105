#include "sentrisk/manifest.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "sentrisk/errors.hpp"
#include "sentrisk/version.hpp"

namespace sentrisk {

std::uint64_t fnv1a64(const void* data, std::size_t len) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string fnv1a64_hex(const std::string& bytes) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(bytes.data(), bytes.size())));
  return buf;
}

std::string hash_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file for hashing: '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return fnv1a64_hex(ss.str());
}

std::string Manifest::fingerprint() const {
  std::ostringstream ss;
  ss << stage << '\n' << version << '\n';
  for (const auto& [k, v] : params) ss << "param " << k << '=' << v << '\n';
  for (const auto& [k, v] : seeds) ss << "seed " << k << '=' << v << '\n';
  for (const auto& [k, v] : inputs) ss << "input " << k << '=' << v << '\n';
  return fnv1a64_hex(ss.str());
}

std::string Manifest::to_json() const {
  nlohmann::ordered_json j;
  j["stage"] = stage;
  j["version"] = version.empty() ? kVersion : version;
  j["manifest_hash"] = fingerprint();
  nlohmann::ordered_json jp = nlohmann::ordered_json::object();
  for (const auto& [k, v] : params) jp[k] = v;
  j["params"] = std::move(jp);
  nlohmann::ordered_json js = nlohmann::ordered_json::object();
  for (const auto& [k, v] : seeds) js[k] = v;
  j["seeds"] = std::move(js);
  nlohmann::ordered_json ji = nlohmann::ordered_json::object();
  for (const auto& [k, v] : inputs) ji[k] = v;
  j["inputs"] = std::move(ji);
  nlohmann::ordered_json jo = nlohmann::ordered_json::object();
  for (const auto& [k, v] : outputs) jo[k] = v;
  j["outputs"] = std::move(jo);
  return j.dump(2) + "\n";
}

}  // namespace sentrisk
