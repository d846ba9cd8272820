#include "gcrpnet/gcrpnet.h"

#include <cstdlib>
#include <cstring>
#include <sstream>
#include <string>

#include "harness/bench.hpp"
#include "harness/checkpoint.hpp"
#include "harness/gradcheck_suite.hpp"
#include "harness/inference.hpp"
#include "harness/kvconfig.hpp"
#include "harness/synth.hpp"
#include "harness/trainer.hpp"
#include "model/gcrpnet_model.hpp"
#include "scan/scan_order.hpp"
#include "support/errors.hpp"
#include "support/parallel.hpp"

struct gcrp_model {
    gcrp::GcrpNet<float> net;
};

namespace {

thread_local std::string g_last_error;

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (out) std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

// Runs fn, converting exceptions to statuses and capturing the message.
template <typename Fn>
gcrp_status guarded(Fn&& fn) {
    try {
        g_last_error.clear();
        fn();
        return GCRP_OK;
    } catch (const gcrp::NumericError& e) {
        g_last_error = e.what();
        return GCRP_ERROR_NUMERIC;
    } catch (const gcrp::ValidationError& e) {
        g_last_error = e.what();
        return GCRP_ERROR_VALIDATION;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return GCRP_ERROR_VALIDATION;
    }
}

gcrp_status require(bool ok, const char* msg) {
    if (ok) return GCRP_OK;
    g_last_error = msg;
    return GCRP_ERROR_VALIDATION;
}

}  // namespace

extern "C" {

const char* gcrp_last_error(void) { return g_last_error.c_str(); }

void gcrp_string_free(char* s) { std::free(s); }

void gcrp_set_threads(int n) { gcrp::set_thread_count(n); }

gcrp_status gcrp_model_create(const char* config_text, gcrp_model** out) {
    if (auto st = require(config_text && out, "config_text and out must be non-null")) return st;
    *out = nullptr;
    return guarded([&] {
        const auto kv = gcrp::parse_kv_text(config_text);
        const gcrp::ModelConfig cfg = gcrp::ModelConfig::from_kv(kv);
        *out = new gcrp_model{gcrp::GcrpNet<float>(cfg)};
    });
}

gcrp_status gcrp_model_load(const char* ckpt_path, gcrp_model** out) {
    if (auto st = require(ckpt_path && out, "ckpt_path and out must be non-null")) return st;
    *out = nullptr;
    return guarded([&] {
        const gcrp::Checkpoint ckpt = gcrp::load_checkpoint(ckpt_path);
        *out = new gcrp_model{gcrp::model_from_checkpoint(ckpt)};
    });
}

void gcrp_model_free(gcrp_model* m) { delete m; }

gcrp_status gcrp_model_param_count(const gcrp_model* m, int64_t* out) {
    if (auto st = require(m && out, "model and out must be non-null")) return st;
    return guarded([&] { *out = m->net.param_count(); });
}

gcrp_status gcrp_model_input_size(const gcrp_model* m, int64_t* out) {
    if (auto st = require(m && out, "model and out must be non-null")) return st;
    return guarded([&] { *out = m->net.config().input_size; });
}

gcrp_status gcrp_model_forward(const gcrp_model* m, const float* input, int64_t input_len,
                               float* out, int64_t out_len) {
    if (auto st = require(m && input && out, "model, input, and out must be non-null")) return st;
    return guarded([&] {
        const int64_t s = m->net.config().input_size;
        if (input_len != 3 * s * s) {
            throw gcrp::ValidationError("input_len must be 3*S*S = " + std::to_string(3 * s * s));
        }
        if (out_len != s * s) {
            throw gcrp::ValidationError("out_len must be S*S = " + std::to_string(s * s));
        }
        gcrp::Tensor<float> x({1, 3, s, s});
        std::memcpy(x.data(), input, sizeof(float) * static_cast<size_t>(input_len));
        const gcrp::Tensor<float> p1 = m->net.forward(x).maps[0];
        std::memcpy(out, p1.data(), sizeof(float) * static_cast<size_t>(out_len));
    });
}

gcrp_status gcrp_synth(int64_t n, int64_t size, uint64_t seed, const char* out_dir) {
    if (auto st = require(out_dir, "out_dir must be non-null")) return st;
    return guarded([&] { gcrp::synth_dataset(out_dir, n, size, seed); });
}

gcrp_status gcrp_train(const char* config_path, const char* data_dir, const char* out_dir,
                       const char* resume_ckpt, char** out_summary) {
    if (auto st = require(config_path && data_dir && out_dir,
                          "config_path, data_dir, and out_dir must be non-null")) {
        return st;
    }
    if (out_summary) *out_summary = nullptr;
    return guarded([&] {
        const auto kv = gcrp::load_kv_file(config_path);
        const gcrp::ModelConfig mc = gcrp::ModelConfig::from_kv(kv);
        const gcrp::TrainConfig tc = gcrp::TrainConfig::from_kv(kv);
        const std::string resume = resume_ckpt ? resume_ckpt : "";
        const gcrp::TrainResult res = gcrp::train_model(mc, tc, data_dir, out_dir, resume);
        if (out_summary) {
            std::ostringstream ss;
            ss << "steps=" << res.steps.size();
            if (!res.steps.empty()) {
                ss << " first_loss=" << res.steps.front().loss
                   << " last_loss=" << res.steps.back().loss;
            }
            ss << " final_checkpoint=" << res.final_checkpoint;
            *out_summary = dup_string(ss.str());
        }
    });
}

gcrp_status gcrp_infer(const char* ckpt_path, const char* images_dir, const char* out_dir) {
    if (auto st = require(ckpt_path && images_dir && out_dir,
                          "ckpt_path, images_dir, and out_dir must be non-null")) {
        return st;
    }
    return guarded([&] { gcrp::run_inference(ckpt_path, images_dir, out_dir); });
}

gcrp_status gcrp_eval(const char* pred_dir, const char* gt_dir, const char* report_path,
                      char** out_summary) {
    if (auto st = require(pred_dir && gt_dir && report_path,
                          "pred_dir, gt_dir, and report_path must be non-null")) {
        return st;
    }
    if (out_summary) *out_summary = nullptr;
    return guarded([&] {
        const gcrp::EvalReport report = gcrp::run_eval(pred_dir, gt_dir);
        const std::string summary = gcrp::report_kv(report);
        gcrp::write_text_file(report_path, summary);
        gcrp::write_text_file(std::string(report_path) + ".csv", gcrp::report_csv(report));
        gcrp::write_text_file(std::string(report_path) + ".curves.csv",
                              gcrp::report_curves_csv(report));
        if (out_summary) *out_summary = dup_string(summary);
    });
}

gcrp_status gcrp_gradcheck(const char* scope, char** out_report) {
    if (auto st = require(scope && out_report, "scope and out_report must be non-null")) return st;
    *out_report = nullptr;
    return guarded([&] {
        const auto cases = gcrp::gradcheck_scope(scope);
        std::ostringstream ss;
        for (const auto& c : cases) {
            ss << (c.pass ? "pass" : "FAIL") << "  " << c.name << "  max_rel_err=" << c.max_rel_err
               << "  tol=" << c.tol;
            if (!c.pass && !c.worst.empty()) ss << "  worst=" << c.worst;
            ss << "\n";
        }
        size_t failed = 0;
        for (const auto& c : cases) failed += c.pass ? 0 : 1;
        ss << cases.size() - failed << "/" << cases.size() << " cases passed\n";
        *out_report = dup_string(ss.str());
        if (failed > 0) {
            throw gcrp::NumericError(std::to_string(failed) + " gradient check case(s) failed");
        }
    });
}

gcrp_status gcrp_scan_dump(int64_t h, int64_t w, int64_t grid, const char* direction,
                           char** out_text) {
    if (auto st = require(direction && out_text, "direction and out_text must be non-null")) {
        return st;
    }
    *out_text = nullptr;
    return guarded([&] {
        const gcrp::ScanDir dir = gcrp::scan_dir_from_name(direction);
        const auto orders = gcrp::less2d_orders(h, w, grid);
        const auto& fwd = orders[static_cast<size_t>(dir)].forward;
        std::ostringstream ss;
        for (size_t i = 0; i < fwd.size(); ++i) ss << (i ? " " : "") << fwd[i];
        *out_text = dup_string(ss.str());
    });
}

gcrp_status gcrp_bench(const char* op, const char* shape, char** out_text) {
    if (auto st = require(op && shape && out_text, "op, shape, and out_text must be non-null")) {
        return st;
    }
    *out_text = nullptr;
    return guarded([&] {
        const gcrp::BenchResult r = gcrp::run_bench(op, shape);
        *out_text = dup_string(gcrp::format_bench(r));
    });
}

}  // extern "C"
