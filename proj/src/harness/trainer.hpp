#pragma once

#include <map>
#include <string>
#include <vector>

#include "harness/dataset.hpp"
#include "model/gcrpnet_model.hpp"

namespace gcrp {

struct TrainConfig {
    double lr = 1e-4;
    int64_t batch = 4;
    int64_t epochs = 1;
    double beta1 = 0.9, beta2 = 0.999, eps = 1e-8, weight_decay = 0.01;
    uint64_t seed = 42;
    bool augment = true;
    int64_t checkpoint_every = 500;

    void validate() const;
    static TrainConfig from_kv(const std::map<std::string, std::string>& kv);
};

struct StepRecord {
    int64_t global_step = 0;  // 1-based count of optimizer steps
    int64_t epoch = 0;
    int64_t step_in_epoch = 0;  // 0-based batch index within the epoch
    double loss = 0;
};

struct TrainResult {
    std::vector<StepRecord> steps;
    std::string final_checkpoint;
};

// Epoch loop over seeded-shuffled batches with AdamW, a CSV loss log
// (out_dir/loss_log.csv), periodic checkpoints, and a final checkpoint
// (out_dir/final.gcrp). Passing resume_ckpt restores parameters, optimizer
// moments, and the exact position in the epoch/batch schedule; because the
// shuffle and augmentation draws are derived statelessly from (seed, epoch,
// index), a resumed run replays the uninterrupted trajectory.
TrainResult train_model(const ModelConfig& mc, const TrainConfig& tc, const std::string& data_root,
                        const std::string& out_dir, const std::string& resume_ckpt = "");

// Mean absolute error of the primary saliency map over a dataset, without
// augmentation. Used to score training-set fit.
double dataset_mae(const GcrpNet<float>& model, const std::vector<SamplePaths>& samples);

// Builds a model from a loaded checkpoint (config comes from the embedded
// canonical text; the digest is cross-checked).
GcrpNet<float> model_from_checkpoint(const struct Checkpoint& ckpt);

}  // namespace gcrp
