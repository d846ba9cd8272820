#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>

namespace gcrp {

struct ModelConfig {
    int64_t base_channels = 32;  // stage widths C, 2C, 4C, 8C
    int64_t state_dim = 8;
    int64_t input_size = 384;    // square input, divisible by 16
    std::array<int, 4> enc_depths{2, 2, 4, 2};
    std::array<int, 4> dec_depths{2, 2, 2, 2};
    int gat_connectivity = 8;
    bool use_dshgam = true;   // off: encoder features skip straight to the decoder
    bool use_mcaem = true;    // off: decoder blocks drop the local enhancement
    bool use_less2d = true;   // off: decoder scans globally at every stage
    uint64_t seed = 42;

    void validate() const;

    // Stable serialization of every field, one key=value per line, sorted.
    std::string canonical_text() const;

    // FNV-1a 64 over canonical_text(); checkpoints embed this to refuse
    // weights from a differently shaped model.
    uint64_t digest() const;

    // Reads the known keys from a flat key=value map; unknown keys are left
    // for other consumers. Malformed values throw.
    static ModelConfig from_kv(const std::map<std::string, std::string>& kv);
};

uint64_t fnv1a64(const void* data, size_t len, uint64_t seed = 0xcbf29ce484222325ULL);

}  // namespace gcrp
