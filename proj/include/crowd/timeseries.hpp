#pragma once

#include <utility>
#include <vector>

namespace crowd {

/// Piecewise-linear time history through (t, value) knots; constant beyond
/// the first and last knot. An empty history is identically zero.
class PiecewiseLinear {
public:
    PiecewiseLinear() = default;
    explicit PiecewiseLinear(std::vector<std::pair<double, double>> knots);

    double operator()(double t) const;
    const std::vector<std::pair<double, double>>& knots() const { return knots_; }
    bool empty() const { return knots_.empty(); }
    /// Time after which the history stays at its final value.
    double last_time() const { return knots_.empty() ? 0.0 : knots_.back().first; }

private:
    std::vector<std::pair<double, double>> knots_;
};

/// Linear interpolation of samples (t_k, y_k), t strictly increasing;
/// clamped outside the sampled range.
double interpolate(const std::vector<double>& t, const std::vector<double>& y, double at);

} // namespace crowd
