#pragma once

#include <string>
#include <vector>

#include "ctedge/vec2.hpp"

namespace ctedge {

struct Disk {
    Vec2 center;
    double radius = 0.0;
    double amplitude = 0.0;
};

// A boundary point of a disk with its outward unit normal and the signed
// jump of the scene function across the boundary along that normal
// (limit from outside minus limit from inside).
struct EdgePoint {
    Vec2 x0;
    Vec2 theta0;
    double delta_f = 0.0;
};

// Piecewise-constant scene: a sum of disk indicators inside the scene
// support |x| < P. Immutable; all queries are pure.
class Phantom {
public:
    Phantom() = default;
    explicit Phantom(std::vector<Disk> disks, double P = 1.0);

    static Phantom single_disk(Vec2 center, double radius, double amplitude,
                               double P = 1.0);

    double eval(Vec2 x) const;

    // Line integral over {x : (cos a, sin a) . x = p}; exact chord sum.
    double radon(double alpha, double p) const;

    // Boundary point of disk `disk_index` at the given polar angle; throws
    // when the point also lies on another disk's boundary (ambiguous
    // normal).
    EdgePoint boundary_point(std::size_t disk_index, double polar_angle) const;

    const std::vector<Disk>& disks() const { return disks_; }
    double support_radius() const { return P_; }

private:
    std::vector<Disk> disks_;
    double P_ = 1.0;
};

// Advisory check of the sampling-geometry conditions at an edge point.
// Rational proximity is measured by the Diophantine quality
// min over q <= 100 of q^2 |v - p/q|, the quantity a finite-type condition
// bounds from below; a plain nearest-rational distance would flag almost
// every real once q reaches 100.
struct AdmissibilityReport {
    double value_norm = 0.0;        // kappa * |x0|
    double rational_gap_norm = 0.0; // scaled distance to nearest rational
    double value_perp = 0.0;        // kappa * (x0 . perp(theta0))
    double rational_gap_perp = 0.0;
    bool curvature_nonzero = false;
    bool inside_support = false;
    bool sigma_positive = true;
    std::string verdict; // "pass (advisory)" | "warn" | "fail: ..."
};

AdmissibilityReport admissibility_report(Vec2 x0, Vec2 theta0, double kappa,
                                         const Phantom& phantom,
                                         bool sigma_positive = true);

} // namespace ctedge
