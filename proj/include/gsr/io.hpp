#ifndef GSR_IO_HPP
#define GSR_IO_HPP

#include "gsr/calibration.hpp"
#include "gsr/evaluation.hpp"
#include "gsr/teams.hpp"
#include "gsr/tracklet.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace gsr {

/// Input record violates a schema; carries the offending file and line.
class SchemaError : public std::runtime_error {
  public:
    SchemaError(const std::string& file, int line, const std::string& what)
        : std::runtime_error(file + ":" + std::to_string(line) + ": " + what),
          file_(file),
          line_(line) {}
    const std::string& file() const { return file_; }
    int line() const { return line_; }

  private:
    std::string file_;
    int line_;
};

class MissingFileError : public std::runtime_error {
  public:
    explicit MissingFileError(const std::string& path)
        : std::runtime_error("missing input file: " + path) {}
};

// JSONL files: one record per line, UTF-8, floats serialized with enough
// digits to round-trip exactly. All writes go through a temp file + rename.

void write_detections(const std::filesystem::path& path, const std::vector<Detection>& dets);
std::vector<Detection> read_detections(const std::filesystem::path& path);

void write_keypoints(const std::filesystem::path& path,
                     const std::vector<std::vector<DetectedKeypoint>>& frames);
std::vector<std::vector<DetectedKeypoint>> read_keypoints(const std::filesystem::path& path);

void write_cameras(const std::filesystem::path& path, const std::vector<CameraParams>& cams,
                   bool refined);
std::vector<CameraParams> read_cameras(const std::filesystem::path& path);

void write_gamestate(const std::filesystem::path& path, const std::vector<GsRecord>& records);
std::vector<GsRecord> read_gamestate(const std::filesystem::path& path);

void write_tracklets(const std::filesystem::path& path, const std::vector<Tracklet>& tracklets);
std::vector<Tracklet> read_tracklets(const std::filesystem::path& path);

struct TeamAssignment {
    int tracklet_id = 0;
    Role role = Role::player;
    Side side = Side::none;
};

void write_clusters(const std::filesystem::path& path, const ClusterSet& clusters,
                    const std::vector<TeamAssignment>& assignments);
std::pair<ClusterSet, std::vector<TeamAssignment>> read_clusters(const std::filesystem::path& path);

void write_scores(const std::filesystem::path& path, const EvalScores& scores);

/// Text with every float printed via "%.17g" (lossless round trip).
std::string format_double(double v);

}  // namespace gsr

#endif  // GSR_IO_HPP
