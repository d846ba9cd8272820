#pragma once

#include <string>

#include "metrics/saliency_metrics.hpp"

namespace gcrp {

// Runs the checkpointed model over every image in images_dir and writes the
// primary saliency map as an 8-bit grayscale PNG of the source image's
// dimensions into out_dir (same file stem, .png).
void run_inference(const std::string& ckpt_path, const std::string& images_dir,
                   const std::string& out_dir);

// Scores predictions against ground truth by matching stems; mismatches on
// either side are itemized. Predictions are resized to GT dimensions when
// they differ.
EvalReport run_eval(const std::string& pred_dir, const std::string& gt_dir);

}  // namespace gcrp
