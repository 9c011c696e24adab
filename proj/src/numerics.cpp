#include "frontlab/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <thread>

namespace frontlab {

namespace {

double pairwise_sum_range(const double* p, std::size_t n) {
    if (n <= 16) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += p[i];
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum_range(p, half) + pairwise_sum_range(p + half, n - half);
}

}  // namespace

double pairwise_sum(std::span<const double> v) {
    return pairwise_sum_range(v.data(), v.size());
}

double smoothstep5(double s) {
    if (s <= 0.0) return 0.0;
    if (s >= 1.0) return 1.0;
    return s * s * s * (10.0 + s * (-15.0 + 6.0 * s));
}

double smoothstep5_derivative(double s) {
    if (s <= 0.0 || s >= 1.0) return 0.0;
    const double q = s * (1.0 - s);
    return 30.0 * q * q;
}

MonotoneCubic::MonotoneCubic(double x0, double h, std::vector<double> y)
    : x0_(x0), h_(h), y_(std::move(y)), d_(y_.size(), 0.0) {
    const std::size_t n = y_.size();
    if (n < 2) return;
    std::vector<double> sec(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) sec[i] = (y_[i + 1] - y_[i]) / h_;
    d_[0] = sec[0];
    d_[n - 1] = sec[n - 2];
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double a = sec[i - 1], b = sec[i];
        if (a * b <= 0.0) {
            d_[i] = 0.0;
            continue;
        }
        const double c = 0.5 * (a + b);
        const double cap = 3.0 * std::min(std::abs(a), std::abs(b));
        d_[i] = std::copysign(std::min(std::abs(c), cap), c);
    }
}

double MonotoneCubic::operator()(double x) const {
    const std::size_t n = y_.size();
    if (n == 0) return 0.0;
    const double s = (x - x0_) / h_;
    if (s <= 0.0) return y_.front();
    if (s >= static_cast<double>(n - 1)) return y_.back();
    auto i = static_cast<std::size_t>(s);
    if (i >= n - 1) i = n - 2;
    const double t = s - static_cast<double>(i);
    if (t == 0.0) return y_[i];
    const double t2 = t * t, t3 = t2 * t;
    const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t;
    const double h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
    return h00 * y_[i] + h10 * h_ * d_[i] + h01 * y_[i + 1] + h11 * h_ * d_[i + 1];
}

double golden_section_min(const std::function<double(double)>& f, double a, double b, double tol) {
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > tol) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn) {
    if (threads <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::exception_ptr> errors(count);
    const unsigned workers = std::min<unsigned>(threads, static_cast<unsigned>(count));
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < count; i += workers) {
                try {
                    fn(i);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace frontlab
