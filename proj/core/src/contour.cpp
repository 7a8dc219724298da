#include "mldoa/contour.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "mldoa/errors.hpp"

namespace mldoa {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

Contour::Contour(std::complex<double> center, double semi_x, double semi_y, int node_count,
                 Orientation orientation, std::vector<std::complex<double>> must_enclose,
                 std::vector<std::complex<double>> must_exclude)
    : center_(center),
      ax_(semi_x),
      ay_(semi_y),
      n_(node_count),
      orient_(orientation),
      enclose_(std::move(must_enclose)),
      exclude_(std::move(must_exclude)) {
    if (!(ax_ > 0.0) || !(ay_ > 0.0)) throw std::invalid_argument("Contour: semi-axes must be positive");
    if (n_ < 64 || n_ % 2 != 0) throw std::invalid_argument("Contour: node_count must be even and >= 64");
    // A point's distance to the ellipse is bounded below by its deviation in
    // scaled radius times the smaller semi-axis.
    const double margin = 1e-6 * std::max(ax_, ay_);
    const double min_axis = std::min(ax_, ay_);
    auto scaled_radius = [&](std::complex<double> p) {
        const double dx = (p.real() - center_.real()) / ax_;
        const double dy = (p.imag() - center_.imag()) / ay_;
        return std::sqrt(dx * dx + dy * dy);
    };
    for (const auto& p : enclose_) {
        if ((1.0 - scaled_radius(p)) * min_axis < margin) {
            std::ostringstream os;
            os << "Contour: must-enclose point (" << p.real() << ", " << p.imag()
               << ") is not strictly inside";
            throw std::invalid_argument(os.str());
        }
    }
    for (const auto& p : exclude_) {
        if ((scaled_radius(p) - 1.0) * min_axis < margin) {
            std::ostringstream os;
            os << "Contour: must-exclude point (" << p.real() << ", " << p.imag()
               << ") is not strictly outside";
            throw std::invalid_argument(os.str());
        }
    }
}

std::complex<double> Contour::node(int k) const {
    double t = kTwoPi * k / n_;
    if (orient_ == Orientation::clockwise) t = -t;
    return {center_.real() + ax_ * std::cos(t), center_.imag() + ay_ * std::sin(t)};
}

std::complex<double> Contour::node_derivative(int k) const {
    double t = kTwoPi * k / n_;
    const double sign = (orient_ == Orientation::clockwise) ? -1.0 : 1.0;
    if (orient_ == Orientation::clockwise) t = -t;
    return {-ax_ * std::sin(t) * sign, ay_ * std::cos(t) * sign};
}

Contour Contour::refined() const {
    return Contour(center_, ax_, ay_, 2 * n_, orient_, enclose_, exclude_);
}

std::complex<double> contour_integral(
    const Contour& c, const std::function<std::complex<double>(std::complex<double>)>& integrand) {
    std::complex<double> acc = 0.0;
    for (int k = 0; k < c.node_count(); ++k) {
        const std::complex<double> z = c.node(k);
        const std::complex<double> f = integrand(z);
        if (!std::isfinite(f.real()) || !std::isfinite(f.imag())) {
            std::ostringstream os;
            os << "contour_integral: non-finite integrand at node " << k << " (z = " << z.real()
               << " + " << z.imag() << "j)";
            throw NumericalError(os.str());
        }
        acc += f * c.node_derivative(k);
    }
    return acc * (kTwoPi / c.node_count());
}

std::complex<double> contour_integral_adaptive(
    const Contour& c, const std::function<std::complex<double>(std::complex<double>)>& integrand,
    double rel_tol, int max_nodes) {
    Contour cur = c;
    std::complex<double> prev = contour_integral(cur, integrand);
    while (cur.node_count() < max_nodes) {
        cur = cur.refined();
        const std::complex<double> next = contour_integral(cur, integrand);
        if (std::abs(next - prev) <= rel_tol * (1.0 + std::abs(next))) return next;
        prev = next;
    }
    throw NumericalError("contour_integral_adaptive: node doubling failed to converge");
}

}  // namespace mldoa
