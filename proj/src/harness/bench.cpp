#include "harness/bench.hpp"

#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>

#include "core/ops_conv.hpp"
#include "core/ops_linalg.hpp"
#include "core/ops_scan.hpp"
#include "graph/gat.hpp"
#include "graph/grid_graph.hpp"
#include "model/gcrpnet_model.hpp"
#include "support/errors.hpp"
#include "support/rng.hpp"

namespace gcrp {

namespace {

std::vector<int64_t> parse_shape(const std::string& text) {
    std::vector<int64_t> dims;
    std::string part;
    std::istringstream ss(text);
    while (std::getline(ss, part, 'x')) {
        try {
            size_t used = 0;
            const long long v = std::stoll(part, &used);
            if (used != part.size() || v <= 0) throw std::invalid_argument(part);
            dims.push_back(v);
        } catch (const std::exception&) {
            throw ValidationError("bad shape component '" + part + "' in '" + text + "'");
        }
    }
    if (dims.empty()) throw ValidationError("empty shape '" + text + "'");
    return dims;
}

int64_t dim_or(const std::vector<int64_t>& s, size_t i, int64_t fallback) {
    return i < s.size() ? s[i] : fallback;
}

template <typename T>
Tensor<T> rand_t(Shape shape, Rng& rng) {
    Tensor<T> t(std::move(shape));
    for (int64_t i = 0; i < t.numel(); ++i) t.data()[i] = static_cast<T>(rng.uniform(-1.0, 1.0));
    return t;
}

double sum_all(const Tensor<float>& t) {
    return std::accumulate(t.data(), t.data() + t.numel(), 0.0);
}

// Runs fn repeatedly until ~0.3s of samples or the iteration cap, after one
// untimed warmup.
template <typename Fn>
void time_loop(BenchResult& r, Fn&& fn) {
    using clock = std::chrono::steady_clock;
    r.checksum = fn();
    double total_ms = 0.0;
    int iters = 0;
    while (iters < 50 && (total_ms < 300.0 || iters < 3)) {
        const auto t0 = clock::now();
        r.checksum = fn();
        const auto t1 = clock::now();
        total_ms += std::chrono::duration<double, std::milli>(t1 - t0).count();
        ++iters;
    }
    r.iters = iters;
    r.ms_per_iter = total_ms / iters;
}

}  // namespace

BenchResult run_bench(const std::string& op, const std::string& shape_text) {
    const std::vector<int64_t> s = parse_shape(shape_text);
    BenchResult r;
    r.op = op;
    r.shape = s;
    Rng rng(99);

    if (op == "matmul") {
        const int64_t m = s[0], k = dim_or(s, 1, s[0]), n = dim_or(s, 2, s[0]);
        Tensor<float> a = rand_t<float>({m, k}, rng);
        Tensor<float> b = rand_t<float>({k, n}, rng);
        time_loop(r, [&] { return sum_all(matmul(a, b)); });
    } else if (op == "conv2d") {
        const int64_t c = s[0], h = dim_or(s, 1, 64), w = dim_or(s, 2, h);
        Tensor<float> x = rand_t<float>({1, c, h, w}, rng);
        Tensor<float> wt = rand_t<float>({c, c, 3, 3}, rng);
        time_loop(r, [&] { return sum_all(conv2d<float>(x, wt, nullptr, 1, 1)); });
    } else if (op == "ssm_scan" || op == "ssm_scan_assoc") {
        const int64_t g = s[0], l = dim_or(s, 1, 256), d = dim_or(s, 2, 32), n = dim_or(s, 3, 8);
        Tensor<float> u = rand_t<float>({g, l, d}, rng);
        Tensor<float> delta({g, l});
        for (int64_t i = 0; i < delta.numel(); ++i)
            delta.data()[i] = static_cast<float>(rng.uniform(0.001, 0.1));
        Tensor<float> A({d, n});
        for (int64_t i = 0; i < A.numel(); ++i)
            A.data()[i] = static_cast<float>(rng.uniform(-2.0, -0.1));
        Tensor<float> B = rand_t<float>({g, l, n}, rng);
        Tensor<float> C = rand_t<float>({g, l, n}, rng);
        if (op == "ssm_scan") {
            time_loop(r, [&] { return sum_all(ssm_scan(u, delta, A, B, C)); });
        } else {
            time_loop(r, [&] { return sum_all(ssm_scan_assoc(u, delta, A, B, C)); });
        }
    } else if (op == "gat") {
        const int64_t h = s[0], w = dim_or(s, 1, s[0]), d = dim_or(s, 2, 32);
        GridGraph graph = build_grid_graph(h, w, 8);
        GatParams<float> p = gat_params_init<float>(d, rng);
        Tensor<float> f = rand_t<float>({graph.n, d}, rng);
        time_loop(r, [&] { return sum_all(gat_forward(f, p, graph)); });
    } else if (op == "model_forward") {
        ModelConfig cfg;
        cfg.input_size = s[0];
        cfg.base_channels = dim_or(s, 1, 16);
        cfg.validate();
        GcrpNet<float> model(cfg);
        Tensor<float> x = rand_t<float>({1, 3, cfg.input_size, cfg.input_size}, rng);
        time_loop(r, [&] { return sum_all(model.forward(x).maps[0]); });
    } else {
        throw ValidationError("unknown bench op '" + op +
                              "' (matmul, conv2d, ssm_scan, ssm_scan_assoc, gat, model_forward)");
    }
    return r;
}

std::string format_bench(const BenchResult& r) {
    std::ostringstream out;
    out << r.op << " shape=";
    for (size_t i = 0; i < r.shape.size(); ++i) out << (i ? "x" : "") << r.shape[i];
    out << " iters=" << r.iters << " ms_per_iter=" << r.ms_per_iter << " checksum=" << r.checksum;
    return out.str();
}

}  // namespace gcrp
