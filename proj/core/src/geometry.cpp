#include "riscrlb/geometry.hpp"

#include <cmath>
#include <utility>

namespace riscrlb {

namespace {

double horizontal_distance(const Position3D& a, const Position3D& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

void check_not_degenerate(const Position3D& q, const Position3D& s) {
    if (horizontal_distance(q, s) < kDegenerateHorizontalTol) {
        throw DegenerateGeometry("horizontal distance to RIS element below tolerance");
    }
}

} // namespace

ScenarioGeometry::ScenarioGeometry(Position3D bs, Position3D ms, std::vector<Position3D> ris_elements)
    : bs_(bs), ms_(ms), ris_(std::move(ris_elements)) {
    if (ris_.empty()) {
        throw ConfigError("RIS must have at least one element");
    }
    if (bs_.z != 0.0 || ms_.z != 0.0) {
        throw ConfigError("BS and MS must lie in the horizontal plane (z = 0)");
    }
    for (const auto& s : ris_) {
        if (!(s.z > 0.0)) {
            throw ConfigError("RIS elements must have z > 0");
        }
        if (!std::isfinite(s.x) || !std::isfinite(s.y) || !std::isfinite(s.z)) {
            throw ConfigError("RIS element position must be finite");
        }
        check_not_degenerate(ms_, s);
    }
}

Eigen::MatrixXd TransformMatrix::full() const {
    const int n = num_paths();
    Eigen::MatrixXd t(2, 2 * n);
    t.leftCols(n) = elevation_cols;
    t.rightCols(n) = azimuth_cols;
    return t;
}

std::vector<Position3D> expand_layout(const RisLayout& layout) {
    if (layout.rows < 1 || layout.cols < 1 || !(layout.element_spacing > 0.0)) {
        throw ConfigError("RIS layout requires positive rows, cols and spacing");
    }
    std::vector<Position3D> out;
    out.reserve(static_cast<std::size_t>(layout.rows) * layout.cols);
    for (int r = 0; r < layout.rows; ++r) {
        for (int c = 0; c < layout.cols; ++c) {
            out.push_back({layout.reference.x + c * layout.element_spacing,
                           layout.reference.y,
                           layout.reference.z + r * layout.element_spacing});
        }
    }
    return out;
}

AoaPair compute_aoa(const Position3D& q, const Position3D& s) {
    check_not_degenerate(q, s);
    const double rho = horizontal_distance(q, s);
    AoaPair angles;
    angles.elevation = std::atan2(rho, s.z);
    angles.azimuth = std::acos((s.x - q.x) / rho);
    return angles;
}

AodPair compute_aod(const Position3D& p, const Position3D& s) {
    const AoaPair mirror = compute_aoa(p, s);
    return {mirror.elevation, mirror.azimuth};
}

TransformMatrix transform_matrix(const ScenarioGeometry& geometry) {
    const int n = geometry.num_paths();
    TransformMatrix t;
    t.elevation_cols.resize(2, n);
    t.azimuth_cols.resize(2, n);
    const Position3D& q = geometry.ms_pos();
    for (int i = 0; i < n; ++i) {
        const Position3D& s = geometry.ris_elements()[i];
        const AoaPair angles = compute_aoa(q, s);
        const double rho = horizontal_distance(q, s);
        const double c = std::cos(angles.azimuth);
        const double sn = std::sin(angles.azimuth);
        const double denom = rho * rho + s.z * s.z;
        t.elevation_cols.col(i) << -s.z * c / denom, s.z * sn / denom;
        t.azimuth_cols.col(i) << sn / rho, c / rho;
    }
    return t;
}

} // namespace riscrlb
