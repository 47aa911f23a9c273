#ifndef GSR_CONFIG_HPP
#define GSR_CONFIG_HPP

#include "gsr/calibration.hpp"
#include "gsr/evaluation.hpp"
#include "gsr/postprocess.hpp"
#include "gsr/synthetic.hpp"
#include "gsr/teams.hpp"
#include "gsr/tracking.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>

namespace gsr {

class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Every stage's knobs in one tree. fps and frame dimensions are shared and
/// propagated into the stage configs on load.
struct PipelineConfig {
    double fps = 30.0;
    double frame_width = 1920.0;
    double frame_height = 1080.0;
    int threads = 0;  // 0 = hardware concurrency

    RefinementConfig refinement;
    SmootherConfig smoother;
    TrackerConfig tracker;
    TeamsConfig teams;
    PostprocessConfig postprocess;
    SimConfig sim;
    EvalConfig eval;

    /// Re-derives the shared fields (fps, frame size) in the stage configs.
    void propagate();
};

/// Strict load: unknown keys anywhere in the tree are rejected.
PipelineConfig load_config(const std::filesystem::path& path);
PipelineConfig config_from_json_text(const std::string& text);

/// Serialization with every default explicit.
std::string config_to_json_text(const PipelineConfig& config);

}  // namespace gsr

#endif  // GSR_CONFIG_HPP
