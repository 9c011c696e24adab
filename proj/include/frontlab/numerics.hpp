#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace frontlab {

// Fixed-order pairwise sum; the result depends only on the input order.
double pairwise_sum(std::span<const double> v);

// Quintic smoothstep on [0,1]: 0 below, 1 above, C2 at both ends.
double smoothstep5(double s);
double smoothstep5_derivative(double s);

// Monotone cubic Hermite interpolation on a uniform grid (centered slopes with a
// Hyman-type limiter). Outside the grid the end values are returned.
class MonotoneCubic {
public:
    MonotoneCubic() = default;
    MonotoneCubic(double x0, double h, std::vector<double> y);
    double operator()(double x) const;
    double x0() const { return x0_; }
    double h() const { return h_; }
    std::size_t size() const { return y_.size(); }

private:
    double x0_ = 0.0;
    double h_ = 1.0;
    std::vector<double> y_;
    std::vector<double> d_;
};

// Golden-section minimisation of a unimodal function on [a,b].
double golden_section_min(const std::function<double(double)>& f, double a, double b, double tol);

// Runs fn(i) for i in [0, count) on up to `threads` workers. Exceptions are rethrown
// in index order after all workers finish.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn);

}  // namespace frontlab
