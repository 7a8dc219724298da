#pragma once

#include <complex>
#include <functional>
#include <vector>

namespace mldoa {

enum class Orientation { clockwise, counterclockwise };

/// Elliptic integration contour sampled with the periodic trapezoid rule.
/// Point sets that must be enclosed or excluded are recorded at construction
/// and checked with a safety margin, so a mis-sized contour fails loudly
/// instead of producing a silently wrong residue sum.
class Contour {
public:
    Contour(std::complex<double> center, double semi_x, double semi_y, int node_count,
            Orientation orientation,
            std::vector<std::complex<double>> must_enclose = {},
            std::vector<std::complex<double>> must_exclude = {});

    std::complex<double> center() const { return center_; }
    double semi_x() const { return ax_; }
    double semi_y() const { return ay_; }
    int node_count() const { return n_; }
    Orientation orientation() const { return orient_; }

    /// k-th node on the parameterized ellipse.
    std::complex<double> node(int k) const;
    /// Derivative of the parameterization at node k (dz/dt).
    std::complex<double> node_derivative(int k) const;

    /// Same geometry with twice the node count.
    Contour refined() const;

private:
    std::complex<double> center_;
    double ax_, ay_;
    int n_;
    Orientation orient_;
    std::vector<std::complex<double>> enclose_, exclude_;
};

/// Trapezoidal quadrature of the contour integral of `integrand`, with the
/// orientation sign applied. Throws NumericalError naming the node when the
/// integrand evaluates non-finite.
std::complex<double> contour_integral(const Contour& c,
                                      const std::function<std::complex<double>(std::complex<double>)>& integrand);

/// Quadrature with automatic node doubling until two successive estimates
/// agree to rel_tol * (1 + |result|), starting from c's node count.
std::complex<double> contour_integral_adaptive(
    const Contour& c, const std::function<std::complex<double>(std::complex<double>)>& integrand,
    double rel_tol = 1e-9, int max_nodes = 1 << 16);

}  // namespace mldoa
