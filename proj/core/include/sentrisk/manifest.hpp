#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace sentrisk {

// 64-bit FNV-1a over a byte string, hex-encoded. Stable content fingerprint
// for manifests; not cryptographic.
std::uint64_t fnv1a64(const void* data, std::size_t len);
std::string fnv1a64_hex(const std::string& bytes);
std::string hash_file(const std::string& path);  // DataError when unreadable

// Run manifest: what produced a set of artifacts. Serialized as JSON with a
// fixed key order; `manifest_hash` fingerprints the inputs+parameters and
// is embedded as a comment line in every artifact the run writes.
struct Manifest {
  std::string stage;
  std::string version;
  std::vector<std::pair<std::string, std::string>> params;   // name -> value text
  std::vector<std::pair<std::string, std::uint64_t>> seeds;  // name -> seed
  std::vector<std::pair<std::string, std::string>> inputs;   // path -> content hash
  std::vector<std::pair<std::string, std::string>> outputs;  // path -> content hash

  // Hash of stage/version/params/seeds/inputs (outputs excluded: they embed
  // this value).
  std::string fingerprint() const;
  std::string to_json() const;
};

}  // namespace sentrisk
