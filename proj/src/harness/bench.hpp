#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace gcrp {

struct BenchResult {
    std::string op;
    std::vector<int64_t> shape;
    int iters = 0;
    double ms_per_iter = 0.0;
    double checksum = 0.0;  // consumes outputs so work is not elided
};

// Times one forward pass of the named op. Known ops: matmul, conv2d,
// ssm_scan, ssm_scan_assoc, gat, model_forward. The shape string is
// 'x'-separated dims, e.g. "128x128x128"; each op documents its layout in
// bench.cpp. Unknown op or bad shape throws ValidationError.
BenchResult run_bench(const std::string& op, const std::string& shape_text);

std::string format_bench(const BenchResult& r);

}  // namespace gcrp
