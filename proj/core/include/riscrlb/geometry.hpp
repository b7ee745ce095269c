#pragma once

#include <vector>

#include <Eigen/Dense>

#include "riscrlb/errors.hpp"

namespace riscrlb {

/// Cartesian position in meters.
struct Position3D {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
};

/// Uniform planar RIS in a vertical plane: columns step along +x, rows step
/// along +z, y constant. Element index is row-major starting at `reference`.
struct RisLayout {
    int rows = 1;
    int cols = 1;
    double element_spacing = 0.1; // meters
    Position3D reference{};       // first element
};

/// Elevation measured from the RIS boresight (z-axis), azimuth in the
/// horizontal plane; see compute_aoa for the exact convention.
struct AoaPair {
    double elevation = 0.0; // radians, in (0, pi/2)
    double azimuth = 0.0;   // radians, in (0, pi)
};

struct AodPair {
    double elevation = 0.0;
    double azimuth = 0.0;
};

/// BS / MS / RIS placement. BS and MS lie in the horizontal plane (z = 0),
/// every RIS element above it (z > 0).
class ScenarioGeometry {
public:
    ScenarioGeometry(Position3D bs, Position3D ms, std::vector<Position3D> ris_elements);

    const Position3D& bs_pos() const { return bs_; }
    const Position3D& ms_pos() const { return ms_; }
    const std::vector<Position3D>& ris_elements() const { return ris_; }
    int num_paths() const { return static_cast<int>(ris_.size()); }

private:
    Position3D bs_;
    Position3D ms_;
    std::vector<Position3D> ris_;
};

/// Jacobian of the per-path AoA pair with respect to the horizontal MS
/// position, assembled as the 2 x 2N matrix [E | F]. The gain block is
/// identically zero and never stored.
struct TransformMatrix {
    Eigen::Matrix2Xd elevation_cols; // E: column i = d(elevation_i)/d(qx,qy)
    Eigen::Matrix2Xd azimuth_cols;   // F: column i = d(azimuth_i)/d(qx,qy)

    int num_paths() const { return static_cast<int>(elevation_cols.cols()); }

    /// [E | F] as one dense 2 x 2N matrix.
    Eigen::MatrixXd full() const;
};

/// MS closer than this (horizontally) to an RIS element is degenerate.
inline constexpr double kDegenerateHorizontalTol = 1e-9;

std::vector<Position3D> expand_layout(const RisLayout& layout);

/// AoA of the path reflected by the element at `s`, seen from the MS at `q`:
/// elevation = atan(rho / s_z) with rho the horizontal MS-element distance,
/// azimuth = acos((s_x - q_x) / rho).
AoaPair compute_aoa(const Position3D& q, const Position3D& s);

/// AoD from the BS at `p` toward the element at `s`; same formulas as the
/// AoA with p in place of q.
AodPair compute_aod(const Position3D& p, const Position3D& s);

TransformMatrix transform_matrix(const ScenarioGeometry& geometry);

} // namespace riscrlb
