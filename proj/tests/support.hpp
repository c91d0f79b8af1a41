#pragma once

#include <cmath>
#include <initializer_list>
#include <string>
#include <vector>

#include "rtspn/model.hpp"

namespace testing {

inline constexpr double kInvE = 0.367879441171442321595523770161;

struct T3 {
    int id;
    double rate;
    double q;
};

inline rtspn::SystemSpec single(std::initializer_list<T3> tasks, double frame = 1.0,
                                rtspn::ArrivalModel arrivals = rtspn::EveryFrame{}) {
    rtspn::SystemSpec s;
    s.frame_length = frame;
    s.resources = {"cpu"};
    for (const auto& t : tasks) s.tasks.push_back({t.id, t.rate, t.q, {"cpu"}});
    s.arrivals = std::move(arrivals);
    return rtspn::validate_spec(std::move(s));
}

// Task 1 on r1, task 2 on r2, the rest on both.
inline rtspn::SystemSpec two_resource(std::initializer_list<T3> tasks, double frame = 1.0) {
    rtspn::SystemSpec s;
    s.frame_length = frame;
    s.resources = {"r1", "r2"};
    for (const auto& t : tasks) {
        std::set<std::string> res = t.id == 1 ? std::set<std::string>{"r1"}
                                    : t.id == 2 ? std::set<std::string>{"r2"}
                                                : std::set<std::string>{"r1", "r2"};
        s.tasks.push_back({t.id, t.rate, t.q, res});
    }
    return rtspn::validate_spec(std::move(s));
}

// E[(T - sum of Exp(rates))^+] by repeated numerical convolution on a uniform
// grid: g_k(s) = int_0^s lambda_k e^{-lambda_k u} g_{k+1}(s - u) du, g_n(s) = s.
inline double deficit_by_quadrature(const std::vector<double>& rates, double T, std::size_t n = 4000) {
    const double h = T / static_cast<double>(n);
    std::vector<double> g(n + 1);
    for (std::size_t i = 0; i <= n; ++i) g[i] = h * static_cast<double>(i);
    for (auto it = rates.rbegin(); it != rates.rend(); ++it) {
        const double lam = *it;
        // Exact integral of the exponential density against the piecewise linear g.
        std::vector<double> next(n + 1, 0.0);
        for (std::size_t i = 1; i <= n; ++i) {
            double acc = 0.0;
            for (std::size_t j = 0; j < i; ++j) {
                const double a = h * static_cast<double>(j);
                const double b = a + h;
                const double ga = g[i - j];
                const double gb = g[i - j - 1];
                // int_a^b lam e^{-lam u} (ga + (gb - ga)(u - a)/h) du
                const double ea = std::exp(-lam * a);
                const double eb = std::exp(-lam * b);
                const double mass = ea - eb;
                const double first = (ea * a - eb * b) + mass / lam;  // int u lam e^{-lam u}
                acc += ga * mass + (gb - ga) / h * (first - a * mass);
            }
            next[i] = acc;
        }
        g = std::move(next);
    }
    return g[n];
}

}  // namespace testing
