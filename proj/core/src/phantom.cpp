#include "ctedge/phantom.hpp"

#include <cmath>

#include "ctedge/errors.hpp"

namespace ctedge {

Phantom::Phantom(std::vector<Disk> disks, double P)
    : disks_(std::move(disks)), P_(P) {
    if (!(P_ > 0.0)) throw ConfigError("Phantom: P must be positive");
    for (const Disk& d : disks_) {
        if (!(d.radius > 0.0))
            throw ConfigError("Phantom: disk radius must be positive");
        if (!(d.center.norm() + d.radius < P_))
            throw ConfigError("Phantom: disk must lie strictly inside |x| < P");
    }
}

Phantom Phantom::single_disk(Vec2 center, double radius, double amplitude,
                             double P) {
    return Phantom({Disk{center, radius, amplitude}}, P);
}

double Phantom::eval(Vec2 x) const {
    double v = 0.0;
    for (const Disk& d : disks_)
        if ((x - d.center).norm_sq() <= d.radius * d.radius) v += d.amplitude;
    return v;
}

double Phantom::radon(double alpha, double p) const {
    const Vec2 dir = unit_vector(alpha);
    double v = 0.0;
    for (const Disk& d : disks_) {
        const double off = p - dir.dot(d.center);
        const double h = d.radius * d.radius - off * off;
        if (h > 0.0) v += d.amplitude * 2.0 * std::sqrt(h);
    }
    return v;
}

EdgePoint Phantom::boundary_point(std::size_t disk_index,
                                  double polar_angle) const {
    if (disk_index >= disks_.size())
        throw ConfigError("boundary_point: disk index out of range");
    const Disk& d = disks_[disk_index];
    const Vec2 normal = unit_vector(polar_angle);
    const Vec2 x0 = d.center + d.radius * normal;
    for (std::size_t i = 0; i < disks_.size(); ++i) {
        if (i == disk_index) continue;
        const double gap =
            std::abs((x0 - disks_[i].center).norm() - disks_[i].radius);
        if (gap < 1e-12)
            throw ConfigError(
                "boundary_point: point lies on a second disk boundary");
    }
    // Outside minus inside along the outward normal: the disk itself stops
    // contributing, every other disk's indicator is locally constant.
    return EdgePoint{x0, normal, -d.amplitude};
}

namespace {

// min over 1 <= q <= 100 of q^2 |v - round(v q)/q| = q |v q - round(v q)|.
double diophantine_gap(double v) {
    const double a = std::abs(v);
    double best = std::abs(a - std::round(a)); // q = 1
    for (int q = 2; q <= 100; ++q) {
        const double s = a * q;
        const double gap = q * std::abs(s - std::round(s));
        if (gap < best) best = gap;
    }
    return best;
}

} // namespace

AdmissibilityReport admissibility_report(Vec2 x0, Vec2 theta0, double kappa,
                                         const Phantom& phantom,
                                         bool sigma_positive) {
    AdmissibilityReport r;
    r.value_norm = kappa * x0.norm();
    r.rational_gap_norm = diophantine_gap(r.value_norm);
    r.value_perp = kappa * x0.dot(perp(theta0));
    r.rational_gap_perp = diophantine_gap(r.value_perp);
    r.inside_support = x0.norm() < phantom.support_radius();
    // Disk boundaries have curvature 1/radius > 0 everywhere.
    r.curvature_nonzero = false;
    for (const Disk& d : phantom.disks()) {
        if (std::abs((x0 - d.center).norm() - d.radius) < 1e-9)
            r.curvature_nonzero = true;
    }
    r.sigma_positive = sigma_positive;

    if (!r.inside_support) {
        r.verdict = "fail: edge point outside the scene support";
    } else if (r.rational_gap_norm < 1e-3 || r.rational_gap_perp < 1e-3 ||
               !r.curvature_nonzero || !r.sigma_positive) {
        r.verdict = "warn";
    } else {
        r.verdict = "pass (advisory)";
    }
    return r;
}

} // namespace ctedge
