#pragma once

#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include "blocks/layers.hpp"
#include "model/model_config.hpp"

namespace gcrp {

enum class CkptDType : uint8_t { f32 = 0, f64 = 1, i64 = 2 };

struct CkptEntry {
    std::string name;
    CkptDType dtype = CkptDType::f32;
    std::vector<int64_t> dims;
    std::vector<uint8_t> raw;  // little-endian payload

    int64_t numel() const {
        int64_t n = 1;
        for (int64_t d : dims) n *= d;
        return n;
    }
};

// On-disk layout: "GCRP" magic, format version, config digest, embedded
// canonical config text, the entries, then a trailing 64-bit checksum over
// everything before it. Values are stored little-endian (asserted at build
// time for this target).
struct Checkpoint {
    uint32_t version = 1;
    uint64_t config_digest = 0;
    std::string config_text;
    std::vector<CkptEntry> entries;

    const CkptEntry* find(const std::string& name) const;
    void add_scalar_i64(const std::string& name, int64_t value);
    int64_t get_scalar_i64(const std::string& name) const;  // throws if absent
};

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

// Model parameters under "param.<name>", optimizer moments under
// "opt.m.<name>" / "opt.v.<name>".
template <typename T>
void pack_tensor_entries(const ParamList<T>& params, const std::string& prefix, Checkpoint& ckpt) {
    for (const auto& p : params) {
        CkptEntry e;
        e.name = prefix + p.name;
        e.dtype = sizeof(T) == 4 ? CkptDType::f32 : CkptDType::f64;
        e.dims = p.tensor.shape();
        e.raw.resize(static_cast<size_t>(p.tensor.numel()) * sizeof(T));
        std::memcpy(e.raw.data(), p.tensor.data(), e.raw.size());
        ckpt.entries.push_back(std::move(e));
    }
}

template <typename T>
void unpack_tensor_entries(const Checkpoint& ckpt, const std::string& prefix, ParamList<T>& params) {
    const CkptDType want = sizeof(T) == 4 ? CkptDType::f32 : CkptDType::f64;
    for (auto& p : params) {
        const CkptEntry* e = ckpt.find(prefix + p.name);
        if (!e) throw ValidationError("checkpoint missing entry " + prefix + p.name);
        if (e->dtype != want || e->dims != p.tensor.shape()) {
            throw ValidationError("checkpoint entry mismatch for " + prefix + p.name);
        }
        std::memcpy(p.tensor.data(), e->raw.data(), e->raw.size());
    }
}

}  // namespace gcrp
