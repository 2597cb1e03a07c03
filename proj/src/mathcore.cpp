#include "tiltwing/mathcore.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace tiltwing {

Quaternion Quaternion::from_axis_angle(const Vec3& axis, double angle) {
    const double n = axis.norm();
    if (n == 0.0) {
        return identity();
    }
    const Vec3 u = axis / n;
    const double s = std::sin(0.5 * angle);
    return Quaternion{std::cos(0.5 * angle), s * u.x(), s * u.y(), s * u.z()};
}

Quaternion Quaternion::from_euler(double roll, double pitch, double yaw) {
    const double cr = std::cos(0.5 * roll), sr = std::sin(0.5 * roll);
    const double cp = std::cos(0.5 * pitch), sp = std::sin(0.5 * pitch);
    const double cy = std::cos(0.5 * yaw), sy = std::sin(0.5 * yaw);
    return Quaternion{cr * cp * cy + sr * sp * sy, sr * cp * cy - cr * sp * sy,
                      cr * sp * cy + sr * cp * sy, cr * cp * sy - sr * sp * cy}
        .normalized();
}

Quaternion Quaternion::from_matrix(const Mat3& r) {
    // Shepperd's method: branch on the largest diagonal term.
    const double tr = r.trace();
    Quaternion q;
    if (tr > r(0, 0) && tr > r(1, 1) && tr > r(2, 2)) {
        const double s = 2.0 * std::sqrt(1.0 + tr);
        q = {0.25 * s, (r(2, 1) - r(1, 2)) / s, (r(0, 2) - r(2, 0)) / s,
             (r(1, 0) - r(0, 1)) / s};
    } else if (r(0, 0) > r(1, 1) && r(0, 0) > r(2, 2)) {
        const double s = 2.0 * std::sqrt(1.0 + r(0, 0) - r(1, 1) - r(2, 2));
        q = {(r(2, 1) - r(1, 2)) / s, 0.25 * s, (r(0, 1) + r(1, 0)) / s,
             (r(0, 2) + r(2, 0)) / s};
    } else if (r(1, 1) > r(2, 2)) {
        const double s = 2.0 * std::sqrt(1.0 + r(1, 1) - r(0, 0) - r(2, 2));
        q = {(r(0, 2) - r(2, 0)) / s, (r(0, 1) + r(1, 0)) / s, 0.25 * s,
             (r(1, 2) + r(2, 1)) / s};
    } else {
        const double s = 2.0 * std::sqrt(1.0 + r(2, 2) - r(0, 0) - r(1, 1));
        q = {(r(1, 0) - r(0, 1)) / s, (r(0, 2) + r(2, 0)) / s,
             (r(1, 2) + r(2, 1)) / s, 0.25 * s};
    }
    return q.normalized().canonical();
}

double Quaternion::norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }

Quaternion Quaternion::normalized() const {
    const double n = norm();
    if (n == 0.0) {
        return identity();
    }
    return {w / n, x / n, y / n, z / n};
}

Quaternion Quaternion::canonical() const {
    if (w < 0.0) {
        return {-w, -x, -y, -z};
    }
    return *this;
}

Mat3 Quaternion::to_matrix() const {
    const Quaternion q = normalized();
    const double ww = q.w * q.w, xx = q.x * q.x, yy = q.y * q.y, zz = q.z * q.z;
    const double xy = q.x * q.y, xz = q.x * q.z, yz = q.y * q.z;
    const double wx = q.w * q.x, wy = q.w * q.y, wz = q.w * q.z;
    Mat3 r;
    r << ww + xx - yy - zz, 2.0 * (xy - wz), 2.0 * (xz + wy),
        2.0 * (xy + wz), ww - xx + yy - zz, 2.0 * (yz - wx),
        2.0 * (xz - wy), 2.0 * (yz + wx), ww - xx - yy + zz;
    return r;
}

Vec3 Quaternion::to_euler() const {
    const Quaternion q = normalized();
    const double roll =
        std::atan2(2.0 * (q.w * q.x + q.y * q.z), 1.0 - 2.0 * (q.x * q.x + q.y * q.y));
    const double sp = std::clamp(2.0 * (q.w * q.y - q.z * q.x), -1.0, 1.0);
    const double pitch = std::asin(sp);
    const double yaw =
        std::atan2(2.0 * (q.w * q.z + q.x * q.y), 1.0 - 2.0 * (q.y * q.y + q.z * q.z));
    return {roll, pitch, yaw};
}

Quaternion quat_multiply(const Quaternion& a, const Quaternion& b) {
    return Quaternion{a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
                      a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
                      a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
                      a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w}
        .normalized();
}

Vec3 rotate_vector(const Quaternion& q, const Vec3& v) {
    // v + 2 u x (u x v + w v), u = vec(q)
    const Quaternion n = q.normalized();
    const Vec3 u = n.vec();
    const Vec3 t = 2.0 * u.cross(v);
    return v + n.w * t + u.cross(t);
}

Vec3 rotate_vector_inverse(const Quaternion& q, const Vec3& v) {
    return rotate_vector(q.conjugate(), v);
}

Quaternion integrate_body_rate(const Quaternion& q, const Vec3& omega, double dt) {
    const double angle = omega.norm() * dt;
    if (angle < 1e-12) {
        const Vec3 h = 0.5 * omega * dt;
        return quat_multiply(q, Quaternion{1.0, h.x(), h.y(), h.z()});
    }
    return quat_multiply(q, Quaternion::from_axis_angle(omega, angle));
}

double angle_between(const Quaternion& a, const Quaternion& b) {
    const Quaternion e = quat_multiply(a.inverse(), b).canonical();
    return 2.0 * std::atan2(e.vec().norm(), e.w);
}

void VehicleGeometry::validate() const {
    auto require = [](bool ok, const char* what) {
        if (!ok) {
            throw std::invalid_argument(std::string("vehicle geometry: ") + what);
        }
    };
    require(b > 0.0, "b must be positive");
    require(l > 0.0, "l must be positive");
    require(m > 0.0, "m must be positive");
    require(g > 0.0, "g must be positive");
    require(D > 0.0, "D must be positive");
    require(D_tail > 0.0, "D_tail must be positive");
    require(rho > 0.0, "rho must be positive");
    require(wingspan > 0.0 && chord > 0.0, "wing dimensions must be positive");
    require(chi_min > 0.0 && chi_min < kHalfPi, "chi_min must lie in (0, pi/2)");
    require(l + x_offset > 0.0, "tail lever arm l + x_offset must be positive");
    require((inertia_diag.array() > 0.0).all(), "inertia must be positive definite");
}

}  // namespace tiltwing
