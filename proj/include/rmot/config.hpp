#pragma once

#include "rmot/errors.hpp"
#include "rmot/response_map.hpp"

namespace rmot {

// All tracker hyperparameters in one place. Defaults follow the reference
// operating point; init_w/init_h and vis_min are deployment choices.
struct TrackerConfig {
    int window_len = 5;      // l: presence window length, frames
    double beta = 0.6;       // positive-state proportion for presence
    int nms_kernel = 3;      // s: local NMS window, odd
    double score_min = 0.05; // peak detection threshold
    int max_peaks = 60;      // k: peak budget per frame
    int roi_size = 20;       // r_z: flow ROI side, px
    double iou_min = 0.7;    // association gate
    int max_age = 30;        // A_max: cascade horizon, frames
    double alpha = 0.7;      // kernel shape parameter
    double init_w = 40, init_h = 100; // newborn track box, px
    double vis_min = 0.5;    // ground-truth visibility cut for labels

    NmsConfig nms() const { return NmsConfig{nms_kernel, score_min, max_peaks}; }

    void validate() const {
        if (window_len < 1) throw ConfigError("window_len must be >= 1");
        if (beta <= 0 || beta > 1) throw ConfigError("beta must be in (0, 1]");
        if (nms_kernel < 1 || nms_kernel % 2 == 0) throw ConfigError("nms_kernel must be odd and >= 1");
        if (score_min <= 0 || score_min >= 1) throw ConfigError("score_min must be in (0, 1)");
        if (max_peaks < 1) throw ConfigError("max_peaks must be >= 1");
        if (roi_size < 1) throw ConfigError("roi_size must be >= 1");
        if (iou_min <= 0 || iou_min >= 1) throw ConfigError("iou_min must be in (0, 1)");
        if (max_age < 1) throw ConfigError("max_age must be >= 1");
        if (alpha <= 0 || alpha >= 1) throw ConfigError("alpha must be in (0, 1)");
        if (init_w <= 0 || init_h <= 0) throw ConfigError("init_w/init_h must be positive");
        if (vis_min < 0 || vis_min > 1) throw ConfigError("vis_min must be in [0, 1]");
    }
};

} // namespace rmot
