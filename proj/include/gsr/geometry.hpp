#ifndef GSR_GEOMETRY_HPP
#define GSR_GEOMETRY_HPP

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <vector>

namespace gsr {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// World frame: origin at pitch centre, X along the 105 m length, Y along the
// 68 m width (broadcast side positive), Z pointing down. Cameras above the
// ground therefore have negative z.
constexpr double kPitchLength = 105.0;
constexpr double kPitchWidth = 68.0;

// NDC space is resolution-free; only the frame aspect ratio enters the
// intrinsics. Broadcast footage is 16:9.
constexpr double kBroadcastAspect = 16.0 / 9.0;

/// Seven-parameter pinhole camera: position, orientation, vertical FoV.
struct CameraParams {
    double x = 0.0;     // meters
    double y = 0.0;     // meters
    double z = 0.0;     // meters, negative above ground
    double pan = 0.0;   // radians, about world z
    double tilt = 0.0;  // radians, from the downward vertical
    double roll = 0.0;  // radians, about the optical axis
    double fov = 1.0;   // radians, vertical field of view, in (0, pi)

    Vec3 position() const { return {x, y, z}; }

    std::array<double, 7> to_array() const { return {x, y, z, pan, tilt, roll, fov}; }
    static CameraParams from_array(const std::array<double, 7>& a) {
        return {a[0], a[1], a[2], a[3], a[4], a[5], a[6]};
    }
};

/// Ground-plane (z=0) to pixel homography, normalized so H(2,2)=1 when that
/// entry is nonzero, else to unit Frobenius norm.
struct Homography {
    Mat3 h = Mat3::Identity();

    Vec2 apply(const Vec2& ground) const;
    Homography inverse() const;
};

struct LossWeights {
    double w1 = 0.048;  // world reprojection
    double w2 = 2.49;   // NDC camera space
    double w3 = 1.0;    // parameter L1
    double w4 = 10.0;   // UV heatmap
};

/// Per-pixel world X/Y of the ground point seen at each pixel. Pixels whose
/// ray misses the ground are flagged invalid.
struct UvMaps {
    int width = 0;
    int height = 0;
    std::vector<double> u;          // world X, row-major
    std::vector<double> v;          // world Y, row-major
    std::vector<uint8_t> valid;

    size_t index(int px, int py) const { return static_cast<size_t>(py) * width + px; }
};

Mat3 intrinsics_from_fov(double fov, double width, double height);

// Rotation is composed as camera-to-world = Rz(pan) * Rx(tilt) * Rz(roll),
// with tilt measured from the downward vertical; the returned matrix is the
// world-to-camera map (its transpose).
Mat3 rotation_from_angles(double pan, double tilt, double roll);

// x_cam = I * R * (X - t); linear, no perspective divide.
Vec3 world_to_ndc(const CameraParams& params, const Vec3& world, double aspect = kBroadcastAspect);

// Exact inverse: X = R^T * I^-1 * x_cam + t.
Vec3 ndc_to_world(const CameraParams& params, const Vec3& ndc, double aspect = kBroadcastAspect);

// Perspective divide into image coordinates, y-down. Throws on zero depth.
Vec2 ndc_to_pixel(const Vec3& ndc, double width, double height);

// Ray through the pixel intersected with the ground plane z=0. Empty when the
// ray is parallel to the ground or the hit lies behind the camera.
std::optional<Vec3> try_pixel_to_pitch(const CameraParams& params, const Vec2& pixel,
                                       double width, double height);

// Throwing variant of try_pixel_to_pitch.
Vec3 pixel_to_pitch(const CameraParams& params, const Vec2& pixel, double width, double height);

// Maps (x_world, y_world, 1) to homogeneous pixel coordinates; agrees with the
// full projection chain on ground points. Throws when the camera lies in the
// ground plane.
Homography homography_from_params(const CameraParams& params, double width, double height);

// Uniform steps x steps grid over the pitch rectangle at z=0, row by row.
std::vector<Vec3> pitch_grid(int steps = 36);

double loss_world(const CameraParams& pred, const CameraParams& gt, std::span<const Vec3> points);
double loss_camera(const CameraParams& pred, const CameraParams& gt, std::span<const Vec3> points);
double loss_params(const CameraParams& pred, const CameraParams& gt);
double loss_heatmap(const UvMaps& pred, const UvMaps& gt);

// w1*world + w2*camera + w3*params + w4*heatmap; the heatmap term is zero
// when either map is absent.
double loss_total(const CameraParams& pred, const CameraParams& gt, std::span<const Vec3> points,
                  const UvMaps* pred_uv, const UvMaps* gt_uv, const LossWeights& weights);

UvMaps uv_heatmaps(const CameraParams& params, int width, int height);

}  // namespace gsr

#endif  // GSR_GEOMETRY_HPP
