#pragma once

#include <string>
#include <vector>

namespace gcrp {

struct GradCheckCase {
    std::string name;
    double max_rel_err = 0;
    double tol = 0;
    bool pass = false;
    std::string worst;  // "leaf#k[i]" of the worst element
};

// Central-difference checks in double precision. Ops and blocks are held to
// 1e-4 relative error; the end-to-end micro model to 1e-3.
std::vector<GradCheckCase> gradcheck_ops();
std::vector<GradCheckCase> gradcheck_blocks();
std::vector<GradCheckCase> gradcheck_model();

// scope: "op", "block", "model", or "all".
std::vector<GradCheckCase> gradcheck_scope(const std::string& scope);

bool all_pass(const std::vector<GradCheckCase>& cases);

}  // namespace gcrp
