#ifndef GSR_PIPELINE_HPP
#define GSR_PIPELINE_HPP

#include "gsr/config.hpp"
#include "gsr/io.hpp"

#include <filesystem>
#include <optional>

namespace gsr {

// File-level pipeline stages. run_all chains exactly these functions over
// the same intermediate files, so stage-by-stage and run-all outputs are
// identical byte for byte.

/// Writes detections.jsonl, keypoints.jsonl, camera.jsonl, gt_gamestate.jsonl.
void stage_synth(const PipelineConfig& config, const std::filesystem::path& out_dir);

/// Per-frame delta-grid refinement (parallel over frames) + SG smoothing.
void stage_calibrate(const PipelineConfig& config, const std::filesystem::path& keypoints_in,
                     const std::filesystem::path& camera_in,
                     const std::filesystem::path& camera_out);

/// Pitch-coordinate DeepSORT pass; detections gain positions via the camera.
void stage_track(const PipelineConfig& config, const std::filesystem::path& detections_in,
                 const std::filesystem::path& camera_in,
                 const std::filesystem::path& tracklets_out);

void stage_teams(const PipelineConfig& config, const std::filesystem::path& tracklets_in,
                 const std::optional<std::filesystem::path>& camera_in,
                 const std::filesystem::path& clusters_out);

// When a camera stream is given, records whose position projects outside the
// frame are dropped from the game state (the minimap only claims what the
// camera could see; interpolation across an off-screen excursion would
// otherwise fabricate entries).
void stage_postprocess(const PipelineConfig& config, const std::filesystem::path& tracklets_in,
                       const std::filesystem::path& clusters_in,
                       const std::filesystem::path& gamestate_out,
                       const std::optional<std::filesystem::path>& camera_in = std::nullopt);

EvalScores stage_eval(const PipelineConfig& config, const std::filesystem::path& gt_in,
                      const std::filesystem::path& pred_in,
                      const std::filesystem::path& scores_out);

/// calibrate -> track -> teams -> postprocess (+ eval when gt present).
std::optional<EvalScores> stage_run_all(const PipelineConfig& config,
                                        const std::filesystem::path& in_dir,
                                        const std::filesystem::path& out_dir);

/// One SVG minimap per frame in [first, last].
void stage_render(const std::filesystem::path& gamestate_in,
                  const std::filesystem::path& out_dir, int first, int last);

// In-memory building blocks shared with the tests.
std::vector<CameraParams> refine_sequence(const PipelineConfig& config,
                                          const std::vector<CameraParams>& initial,
                                          const std::vector<std::vector<DetectedKeypoint>>& keypoints,
                                          const PitchModel& model);

std::vector<Tracklet> track_detections(const PipelineConfig& config,
                                       const std::vector<Detection>& dets,
                                       const std::vector<CameraParams>& cameras);

std::string render_minimap_svg(const PitchModel& model, const std::vector<GsRecord>& frame_records);

}  // namespace gsr

#endif  // GSR_PIPELINE_HPP
