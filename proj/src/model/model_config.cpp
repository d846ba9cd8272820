#include "model/model_config.hpp"

#include <sstream>

#include "support/errors.hpp"

namespace gcrp {

uint64_t fnv1a64(const void* data, size_t len, uint64_t seed) {
    const unsigned char* p = static_cast<const unsigned char*>(data);
    uint64_t h = seed;
    for (size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

void ModelConfig::validate() const {
    if (base_channels < 2 || base_channels % 2 != 0) {
        throw ValidationError("base_channels must be even and >= 2 (the patch embed uses C/2)");
    }
    if (state_dim < 1) throw ValidationError("state_dim must be >= 1");
    if (input_size < 32 || input_size % 16 != 0) {
        throw ValidationError("input_size must be >= 32 and divisible by 16 (got " +
                              std::to_string(input_size) + ")");
    }
    for (int d : enc_depths) {
        if (d < 1) throw ValidationError("encoder depths must be >= 1");
    }
    for (int d : dec_depths) {
        if (d < 1) throw ValidationError("decoder depths must be >= 1");
    }
    if (gat_connectivity != 4 && gat_connectivity != 8) {
        throw ValidationError("gat_connectivity must be 4 or 8");
    }
}

namespace {

std::string depths_str(const std::array<int, 4>& d) {
    std::ostringstream os;
    os << d[0] << ',' << d[1] << ',' << d[2] << ',' << d[3];
    return os.str();
}

std::array<int, 4> parse_depths(const std::string& s, const std::string& key) {
    std::array<int, 4> out{};
    std::istringstream is(s);
    std::string tok;
    int i = 0;
    while (std::getline(is, tok, ',')) {
        if (i >= 4) throw ValidationError(key + ": expected 4 comma-separated depths, got '" + s + "'");
        try {
            out[static_cast<size_t>(i++)] = std::stoi(tok);
        } catch (const std::exception&) {
            throw ValidationError(key + ": bad depth '" + tok + "'");
        }
    }
    if (i != 4) throw ValidationError(key + ": expected 4 comma-separated depths, got '" + s + "'");
    return out;
}

int64_t parse_i64(const std::string& s, const std::string& key) {
    try {
        size_t pos = 0;
        const int64_t v = std::stoll(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ValidationError(key + ": bad integer '" + s + "'");
    }
}

bool parse_bool(const std::string& s, const std::string& key) {
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    throw ValidationError(key + ": bad boolean '" + s + "'");
}

}  // namespace

std::string ModelConfig::canonical_text() const {
    std::ostringstream os;
    os << "base_channels=" << base_channels << '\n'
       << "dec_depths=" << depths_str(dec_depths) << '\n'
       << "enc_depths=" << depths_str(enc_depths) << '\n'
       << "gat_connectivity=" << gat_connectivity << '\n'
       << "input_size=" << input_size << '\n'
       << "seed=" << seed << '\n'
       << "state_dim=" << state_dim << '\n'
       << "use_dshgam=" << (use_dshgam ? 1 : 0) << '\n'
       << "use_less2d=" << (use_less2d ? 1 : 0) << '\n'
       << "use_mcaem=" << (use_mcaem ? 1 : 0) << '\n';
    return os.str();
}

uint64_t ModelConfig::digest() const {
    const std::string text = canonical_text();
    return fnv1a64(text.data(), text.size());
}

ModelConfig ModelConfig::from_kv(const std::map<std::string, std::string>& kv) {
    ModelConfig c;
    auto get = [&kv](const char* key) -> const std::string* {
        auto it = kv.find(key);
        return it == kv.end() ? nullptr : &it->second;
    };
    if (const auto* v = get("base_channels")) c.base_channels = parse_i64(*v, "base_channels");
    if (const auto* v = get("state_dim")) c.state_dim = parse_i64(*v, "state_dim");
    if (const auto* v = get("input_size")) c.input_size = parse_i64(*v, "input_size");
    if (const auto* v = get("enc_depths")) c.enc_depths = parse_depths(*v, "enc_depths");
    if (const auto* v = get("dec_depths")) c.dec_depths = parse_depths(*v, "dec_depths");
    if (const auto* v = get("gat_connectivity")) {
        c.gat_connectivity = static_cast<int>(parse_i64(*v, "gat_connectivity"));
    }
    if (const auto* v = get("use_dshgam")) c.use_dshgam = parse_bool(*v, "use_dshgam");
    if (const auto* v = get("use_mcaem")) c.use_mcaem = parse_bool(*v, "use_mcaem");
    if (const auto* v = get("use_less2d")) c.use_less2d = parse_bool(*v, "use_less2d");
    if (const auto* v = get("seed")) c.seed = static_cast<uint64_t>(parse_i64(*v, "seed"));
    c.validate();
    return c;
}

}  // namespace gcrp
