#include "crowd/timeseries.hpp"

#include <algorithm>

#include "crowd/error.hpp"

namespace crowd {

PiecewiseLinear::PiecewiseLinear(std::vector<std::pair<double, double>> knots) : knots_(std::move(knots)) {
    for (std::size_t k = 1; k < knots_.size(); ++k)
        if (!(knots_[k].first > knots_[k - 1].first)) throw Error("time history knots must increase in time");
}

double PiecewiseLinear::operator()(double t) const {
    if (knots_.empty()) return 0.0;
    if (t <= knots_.front().first) return knots_.front().second;
    if (t >= knots_.back().first) return knots_.back().second;
    auto hi = std::upper_bound(knots_.begin(), knots_.end(), t,
                               [](double v, const std::pair<double, double>& k) { return v < k.first; });
    auto lo = hi - 1;
    const double w = (t - lo->first) / (hi->first - lo->first);
    return lo->second + w * (hi->second - lo->second);
}

double interpolate(const std::vector<double>& t, const std::vector<double>& y, double at) {
    if (t.empty()) throw Error("cannot interpolate an empty series");
    if (at <= t.front()) return y.front();
    if (at >= t.back()) return y.back();
    auto hi = std::upper_bound(t.begin(), t.end(), at);
    const auto k = static_cast<std::size_t>(hi - t.begin());
    const double w = (at - t[k - 1]) / (t[k] - t[k - 1]);
    return y[k - 1] + w * (y[k] - y[k - 1]);
}

} // namespace crowd
