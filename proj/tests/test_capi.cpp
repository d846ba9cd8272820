// Exercises the shared library the way an external consumer would: only
// through gcrpnet/gcrpnet.h, never the C++ headers.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "gcrpnet/gcrpnet.h"

namespace fs = std::filesystem;

namespace {

const char* kMicroConfig =
    "base_channels=4\n"
    "state_dim=2\n"
    "input_size=32\n"
    "enc_depths=1,1,1,1\n"
    "dec_depths=1,1,1,1\n"
    "seed=7\n";

fs::path fresh_dir(const std::string& name) {
    fs::path p = fs::temp_directory_path() / "gcrp_capi_tests" / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string take(char* s) {
    REQUIRE(s != nullptr);
    std::string out(s);
    gcrp_string_free(s);
    return out;
}

}  // namespace

TEST_CASE("model lifecycle and forward through the C boundary") {
    gcrp_set_threads(1);

    gcrp_model* m = nullptr;
    REQUIRE(gcrp_model_create(kMicroConfig, &m) == GCRP_OK);
    REQUIRE(m != nullptr);

    int64_t params = 0, size = 0;
    CHECK(gcrp_model_param_count(m, &params) == GCRP_OK);
    CHECK(params > 0);
    CHECK(gcrp_model_input_size(m, &size) == GCRP_OK);
    CHECK(size == 32);

    std::vector<float> input(static_cast<size_t>(3 * size * size), 0.25f);
    std::vector<float> out(static_cast<size_t>(size * size), -1.0f);
    REQUIRE(gcrp_model_forward(m, input.data(), static_cast<int64_t>(input.size()), out.data(),
                               static_cast<int64_t>(out.size())) == GCRP_OK);
    for (float v : out) {
        CHECK(v > 0.0f);
        CHECK(v < 1.0f);
    }

    // Same input, same output: the handle owns no hidden mutable state.
    std::vector<float> out2(out.size(), -1.0f);
    REQUIRE(gcrp_model_forward(m, input.data(), static_cast<int64_t>(input.size()), out2.data(),
                               static_cast<int64_t>(out2.size())) == GCRP_OK);
    CHECK(std::memcmp(out.data(), out2.data(), out.size() * sizeof(float)) == 0);

    // Wrong buffer lengths are refused with a message, not UB.
    CHECK(gcrp_model_forward(m, input.data(), 17, out.data(), static_cast<int64_t>(out.size())) ==
          GCRP_ERROR_VALIDATION);
    CHECK(std::string(gcrp_last_error()).size() > 0);
    CHECK(gcrp_model_forward(m, input.data(), static_cast<int64_t>(input.size()), out.data(), 5) ==
          GCRP_ERROR_VALIDATION);

    gcrp_model_free(m);
    gcrp_model_free(nullptr);  // free of null is a no-op
}

TEST_CASE("creation failures report through status and last_error") {
    gcrp_model* m = nullptr;
    CHECK(gcrp_model_create("base_channels=3\n", &m) == GCRP_ERROR_VALIDATION);
    CHECK(m == nullptr);
    CHECK(std::string(gcrp_last_error()).find("base_channels") != std::string::npos);

    CHECK(gcrp_model_create(nullptr, &m) == GCRP_ERROR_VALIDATION);
    CHECK(gcrp_model_create(kMicroConfig, nullptr) == GCRP_ERROR_VALIDATION);
    CHECK(gcrp_model_param_count(nullptr, nullptr) == GCRP_ERROR_VALIDATION);

    CHECK(gcrp_model_load("/nonexistent/path.gcrp", &m) == GCRP_ERROR_VALIDATION);
    CHECK(m == nullptr);

    gcrp_string_free(nullptr);  // also a no-op
}

TEST_CASE("scan order dump matches the documented block traversal") {
    char* text = nullptr;
    REQUIRE(gcrp_scan_dump(4, 4, 2, "rightward", &text) == GCRP_OK);
    CHECK(take(text) == "0 1 4 5 2 3 6 7 8 9 12 13 10 11 14 15");

    text = nullptr;
    REQUIRE(gcrp_scan_dump(2, 2, 1, "leftward", &text) == GCRP_OK);
    CHECK(take(text) == "3 2 1 0");

    text = nullptr;
    CHECK(gcrp_scan_dump(3, 5, 2, "rightward", &text) == GCRP_ERROR_VALIDATION);
    CHECK(text == nullptr);
    CHECK(gcrp_scan_dump(4, 4, 2, "sideways", &text) == GCRP_ERROR_VALIDATION);
    CHECK(gcrp_scan_dump(4, 4, 2, "rightward", nullptr) == GCRP_ERROR_VALIDATION);
}

TEST_CASE("synthesize, train, infer, and evaluate through the one-shot calls") {
    fs::path data = fresh_dir("pipeline_data");
    REQUIRE(gcrp_synth(4, 32, 5, data.string().c_str()) == GCRP_OK);
    CHECK(fs::exists(data / "images"));
    CHECK(fs::exists(data / "GT"));

    // One config file carries both model and training keys.
    fs::path cfg_dir = fresh_dir("pipeline_cfg");
    fs::path cfg = cfg_dir / "run.cfg";
    {
        std::ofstream f(cfg);
        f << kMicroConfig << "lr=1e-3\nbatch=2\nepochs=1\ncheckpoint_every=0\n";
    }

    fs::path run = fresh_dir("pipeline_run");
    char* summary = nullptr;
    REQUIRE(gcrp_train(cfg.string().c_str(), data.string().c_str(), run.string().c_str(), nullptr,
                       &summary) == GCRP_OK);
    const std::string train_text = take(summary);
    CHECK(train_text.find("steps") != std::string::npos);
    const fs::path ckpt = run / "final.gcrp";
    REQUIRE(fs::exists(ckpt));

    gcrp_model* m = nullptr;
    REQUIRE(gcrp_model_load(ckpt.string().c_str(), &m) == GCRP_OK);
    gcrp_model_free(m);

    fs::path preds = fresh_dir("pipeline_preds");
    REQUIRE(gcrp_infer(ckpt.string().c_str(), (data / "images").string().c_str(),
                       preds.string().c_str()) == GCRP_OK);
    int pngs = 0;
    for (const auto& e : fs::directory_iterator(preds)) pngs += e.path().extension() == ".png";
    CHECK(pngs == 4);

    fs::path report = fresh_dir("pipeline_report") / "report.txt";
    summary = nullptr;
    REQUIRE(gcrp_eval(preds.string().c_str(), (data / "GT").string().c_str(),
                      report.string().c_str(), &summary) == GCRP_OK);
    const std::string eval_text = take(summary);
    CHECK(eval_text.find("mae=") != std::string::npos);
    CHECK(eval_text.find("s_measure=") != std::string::npos);
    CHECK(fs::exists(report));
    CHECK(fs::exists(report.string() + ".csv"));
    CHECK(fs::exists(report.string() + ".curves.csv"));

    // Error paths of the one-shots.
    CHECK(gcrp_synth(0, 32, 5, data.string().c_str()) == GCRP_ERROR_VALIDATION);
    CHECK(gcrp_train(cfg.string().c_str(), "/nonexistent/data", run.string().c_str(), nullptr,
                     nullptr) == GCRP_ERROR_VALIDATION);
    CHECK(gcrp_infer("/nonexistent/ckpt.gcrp", (data / "images").string().c_str(),
                     preds.string().c_str()) == GCRP_ERROR_VALIDATION);
    CHECK(gcrp_eval(preds.string().c_str(), "/nonexistent/gt", report.string().c_str(), nullptr) ==
          GCRP_ERROR_VALIDATION);
}

TEST_CASE("gradient verification is callable per scope") {
    char* report = nullptr;
    REQUIRE(gcrp_gradcheck("op", &report) == GCRP_OK);
    const std::string text = take(report);
    CHECK(text.find("pass") != std::string::npos);

    report = nullptr;
    CHECK(gcrp_gradcheck("everything", &report) == GCRP_ERROR_VALIDATION);
    CHECK(report == nullptr);
    CHECK(gcrp_gradcheck(nullptr, &report) == GCRP_ERROR_VALIDATION);
}

TEST_CASE("micro benchmarks run and reject unknown ops") {
    char* text = nullptr;
    REQUIRE(gcrp_bench("matmul", "8x8x8", &text) == GCRP_OK);
    const std::string line = take(text);
    CHECK(line.find("matmul") != std::string::npos);

    text = nullptr;
    CHECK(gcrp_bench("sort", "8x8", &text) == GCRP_ERROR_VALIDATION);
    CHECK(text == nullptr);
    CHECK(gcrp_bench("matmul", "", &text) == GCRP_ERROR_VALIDATION);
}
