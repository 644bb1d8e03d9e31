#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "errors.hpp"

namespace wpc {

inline constexpr double filter_tol = 1e-10;

//
// Orthogonal two-channel filter pair. The high-pass taps are derived from the
// low-pass ones by g[k] = (-1)^k h[L-1-k]; taps are validated on construction.
//
class FilterPair
{
public:
    FilterPair(std::string name, std::vector<double> h) : name_(std::move(name)), h_(std::move(h))
    {
        const std::size_t len = h_.size();
        if (len < 2 || len % 2 != 0)
            throw InvalidFilter("filter '" + name_ + "' needs an even number of taps, got " +
                                std::to_string(len));
        g_.resize(len);
        for (std::size_t k = 0; k < len; ++k)
            g_[k] = (k % 2 == 0 ? 1.0 : -1.0) * h_[len - 1 - k];

        double sum = 0.0;
        for (double t : h_)
            sum += t;
        if (std::abs(sum - std::sqrt(2.0)) > filter_tol)
            throw InvalidFilter("filter '" + name_ + "' taps sum to " + std::to_string(sum) +
                                ", expected sqrt(2)");

        for (std::size_t j = 0; 2 * j < len; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k + 2 * j < len; ++k)
                s += h_[k] * h_[k + 2 * j];
            const double expected = j == 0 ? 1.0 : 0.0;
            if (std::abs(s - expected) > filter_tol)
                throw InvalidFilter("filter '" + name_ + "' fails double-shift orthonormality at shift " +
                                    std::to_string(2 * j));
        }
    }

    const std::string& name() const noexcept { return name_; }
    const std::vector<double>& lowpass() const noexcept { return h_; }
    const std::vector<double>& highpass() const noexcept { return g_; }
    std::size_t size() const noexcept { return h_.size(); }

private:
    std::string name_;
    std::vector<double> h_;
    std::vector<double> g_;
};

inline FilterPair haar_filter()
{
    const double c = 1.0 / std::sqrt(2.0);
    return FilterPair("haar", {c, c});
}

// Daubechies-4 (two vanishing moments).
inline FilterPair d4_filter()
{
    const double s3 = std::sqrt(3.0);
    const double d = 4.0 * std::sqrt(2.0);
    return FilterPair("d4", {(1.0 + s3) / d, (3.0 + s3) / d, (3.0 - s3) / d, (1.0 - s3) / d});
}

inline FilterPair filter_by_name(const std::string& name)
{
    if (name == "haar")
        return haar_filter();
    if (name == "d4")
        return d4_filter();
    throw InvalidFilter("unknown filter '" + name + "' (expected haar or d4)");
}

// {"h": [...]}; an optional "name" is kept for reports.
inline FilterPair filter_from_json(const nlohmann::json& j)
{
    if (!j.is_object() || !j.contains("h") || !j["h"].is_array())
        throw MalformedInput("filter JSON needs an array field \"h\"");
    std::vector<double> h;
    for (const auto& t : j["h"]) {
        if (!t.is_number())
            throw MalformedInput("filter taps must be numbers");
        h.push_back(t.get<double>());
    }
    return FilterPair(j.value("name", std::string("custom")), std::move(h));
}

inline nlohmann::json to_json(const FilterPair& f)
{
    return {{"name", f.name()}, {"h", f.lowpass()}, {"g", f.highpass()}};
}

} // namespace wpc
