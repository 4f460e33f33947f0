#pragma once

#include <Eigen/Core>
#include <vector>

#include "hopf/series.hpp"

namespace hopf {

// Map germ fixing the origin: n series in n variables with zero constant
// terms and an invertible linear part. Models both the dynamics g and
// coordinate changes U.
class MapGerm {
public:
    explicit MapGerm(std::vector<TruncatedSeries> components);
    static MapGerm identity(int dimension, int cap);
    static MapGerm linear(const Eigen::MatrixXcd& A, int cap);

    int dimension() const { return int(components_.size()); }
    int cap() const { return components_.front().cap(); }

    const std::vector<TruncatedSeries>& components() const { return components_; }
    const TruncatedSeries& component(int i) const { return components_[std::size_t(i)]; }
    const Eigen::MatrixXcd& linear_part() const { return linear_part_; }

    double max_abs_coeff() const;
    // Largest coefficient modulus among terms of degree >= 2.
    double nonlinear_max_abs_coeff() const;

private:
    std::vector<TruncatedSeries> components_;
    Eigen::MatrixXcd linear_part_;
};

// outer(inner(z)), truncated at the shared cap.
MapGerm compose_germs(const MapGerm& outer, const MapGerm& inner);
MapGerm compose_germs(const MapGerm& a, const MapGerm& b, const MapGerm& c);

// Inverse in the jet ring: compose_germs(g, invert_germ(g)) = identity to cap.
MapGerm invert_germ(const MapGerm& g);

// Max coefficient modulus of U∘g∘U⁻¹ − target across all degrees ≤ cap.
double verify_conjugacy(const MapGerm& U, const MapGerm& g, const MapGerm& target);

}  // namespace hopf
