#include "harness/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "support/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint payloads are memcpy'd little-endian");

namespace gcrp {

namespace {

constexpr char kMagic[4] = {'G', 'C', 'R', 'P'};

void put_bytes(std::vector<uint8_t>& buf, const void* p, size_t n) {
    const uint8_t* b = static_cast<const uint8_t*>(p);
    buf.insert(buf.end(), b, b + n);
}

template <typename T>
void put_scalar(std::vector<uint8_t>& buf, T v) {
    put_bytes(buf, &v, sizeof(T));
}

struct Reader {
    const uint8_t* p;
    size_t left;
    std::string path;

    void take(void* out, size_t n) {
        if (n > left) throw ValidationError("truncated checkpoint: " + path);
        std::memcpy(out, p, n);
        p += n;
        left -= n;
    }

    template <typename T>
    T scalar() {
        T v;
        take(&v, sizeof(T));
        return v;
    }

    std::string str(size_t n) {
        if (n > left) throw ValidationError("truncated checkpoint: " + path);
        std::string s(reinterpret_cast<const char*>(p), n);
        p += n;
        left -= n;
        return s;
    }
};

}  // namespace

const CkptEntry* Checkpoint::find(const std::string& name) const {
    for (const auto& e : entries) {
        if (e.name == name) return &e;
    }
    return nullptr;
}

void Checkpoint::add_scalar_i64(const std::string& name, int64_t value) {
    CkptEntry e;
    e.name = name;
    e.dtype = CkptDType::i64;
    e.dims = {1};
    e.raw.resize(sizeof(int64_t));
    std::memcpy(e.raw.data(), &value, sizeof(int64_t));
    entries.push_back(std::move(e));
}

int64_t Checkpoint::get_scalar_i64(const std::string& name) const {
    const CkptEntry* e = find(name);
    if (!e || e->dtype != CkptDType::i64 || e->raw.size() != sizeof(int64_t)) {
        throw ValidationError("checkpoint missing int entry " + name);
    }
    int64_t v;
    std::memcpy(&v, e->raw.data(), sizeof(int64_t));
    return v;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
    std::vector<uint8_t> buf;
    put_bytes(buf, kMagic, 4);
    put_scalar<uint32_t>(buf, ckpt.version);
    put_scalar<uint64_t>(buf, ckpt.config_digest);
    put_scalar<uint32_t>(buf, static_cast<uint32_t>(ckpt.config_text.size()));
    put_bytes(buf, ckpt.config_text.data(), ckpt.config_text.size());
    put_scalar<uint32_t>(buf, static_cast<uint32_t>(ckpt.entries.size()));
    for (const auto& e : ckpt.entries) {
        put_scalar<uint32_t>(buf, static_cast<uint32_t>(e.name.size()));
        put_bytes(buf, e.name.data(), e.name.size());
        put_scalar<uint8_t>(buf, static_cast<uint8_t>(e.dtype));
        put_scalar<uint8_t>(buf, static_cast<uint8_t>(e.dims.size()));
        for (int64_t d : e.dims) put_scalar<uint64_t>(buf, static_cast<uint64_t>(d));
        put_scalar<uint64_t>(buf, static_cast<uint64_t>(e.raw.size()));
        put_bytes(buf, e.raw.data(), e.raw.size());
    }
    put_scalar<uint64_t>(buf, fnv1a64(buf.data(), buf.size()));

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw ValidationError("cannot write checkpoint " + path);
    f.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!f) throw ValidationError("short write to checkpoint " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ValidationError("cannot open checkpoint " + path);
    std::vector<uint8_t> buf((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    if (buf.size() < 4 + sizeof(uint32_t) + sizeof(uint64_t) * 2) {
        throw ValidationError("truncated checkpoint: " + path);
    }
    uint64_t stored;
    std::memcpy(&stored, buf.data() + buf.size() - sizeof(uint64_t), sizeof(uint64_t));
    const uint64_t computed = fnv1a64(buf.data(), buf.size() - sizeof(uint64_t));
    if (stored != computed) throw ValidationError("checkpoint checksum mismatch: " + path);

    Reader r{buf.data(), buf.size() - sizeof(uint64_t), path};
    char magic[4];
    r.take(magic, 4);
    if (std::memcmp(magic, kMagic, 4) != 0) {
        throw ValidationError("not a checkpoint file: " + path);
    }
    Checkpoint ckpt;
    ckpt.version = r.scalar<uint32_t>();
    if (ckpt.version != 1) {
        throw ValidationError("unsupported checkpoint version " + std::to_string(ckpt.version));
    }
    ckpt.config_digest = r.scalar<uint64_t>();
    ckpt.config_text = r.str(r.scalar<uint32_t>());
    const uint32_t count = r.scalar<uint32_t>();
    ckpt.entries.reserve(count);
    for (uint32_t i = 0; i < count; ++i) {
        CkptEntry e;
        e.name = r.str(r.scalar<uint32_t>());
        const uint8_t dtype = r.scalar<uint8_t>();
        if (dtype > 2) throw ValidationError("bad dtype tag in checkpoint entry " + e.name);
        e.dtype = static_cast<CkptDType>(dtype);
        const uint8_t rank = r.scalar<uint8_t>();
        e.dims.resize(rank);
        for (uint8_t d = 0; d < rank; ++d) {
            e.dims[d] = static_cast<int64_t>(r.scalar<uint64_t>());
        }
        const uint64_t bytes = r.scalar<uint64_t>();
        const size_t elem = e.dtype == CkptDType::f32 ? 4 : 8;
        if (bytes != static_cast<uint64_t>(e.numel()) * elem) {
            throw ValidationError("entry size mismatch in checkpoint entry " + e.name);
        }
        e.raw.resize(bytes);
        r.take(e.raw.data(), bytes);
        ckpt.entries.push_back(std::move(e));
    }
    if (r.left != 0) throw ValidationError("trailing bytes in checkpoint: " + path);
    return ckpt;
}

}  // namespace gcrp
