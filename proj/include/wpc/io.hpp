#pragma once

//
// Matrix JSON: {"dim": n, "data": [row-major, n*n reals]}. A diagonal
// operator may also be given by its symbol: {"symbol": [r_0, ..., r_{n-1}]}.
//

#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "errors.hpp"
#include "matrix.hpp"
#include "psd.hpp"

namespace wpc {

// Largest tolerated |a_ij - a_ji| relative to max |a_ij| when reading a file.
inline constexpr double symmetry_tol = 1e-12;

inline SymMatrix matrix_from_json(const nlohmann::json& j)
{
    if (!j.is_object())
        throw MalformedInput("matrix JSON must be an object");

    auto numbers = [](const nlohmann::json& arr, const char* field) {
        if (!arr.is_array())
            throw MalformedInput(std::string("matrix JSON field \"") + field + "\" must be an array");
        std::vector<double> v;
        v.reserve(arr.size());
        for (const auto& x : arr) {
            if (!x.is_number())
                throw MalformedInput(std::string("matrix JSON field \"") + field + "\" holds a non-number");
            const double d = x.get<double>();
            if (!std::isfinite(d))
                throw MalformedInput("matrix entries must be finite");
            v.push_back(d);
        }
        return v;
    };

    if (j.contains("symbol")) {
        const auto sym = numbers(j["symbol"], "symbol");
        if (sym.empty())
            throw MalformedInput("symbol must be nonempty");
        return SymMatrix(Matrix::diagonal(sym));
    }

    if (!j.contains("dim") || !j["dim"].is_number_integer() || j["dim"].get<long long>() < 1)
        throw MalformedInput("matrix JSON needs a positive integer \"dim\"");
    const auto n = std::size_t(j["dim"].get<long long>());
    if (!j.contains("data"))
        throw MalformedInput("matrix JSON needs a \"data\" array");
    auto data = numbers(j["data"], "data");
    if (data.size() != n * n)
        throw MalformedInput("matrix JSON data has " + std::to_string(data.size()) +
                             " entries, expected dim^2 = " + std::to_string(n * n));
    Matrix m(n, n, std::move(data));
    const double scale = std::max(1.0, m.max_abs());
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = i + 1; k < n; ++k)
            if (std::abs(m(i, k) - m(k, i)) > symmetry_tol * scale)
                throw MalformedInput("matrix is not symmetric at (" + std::to_string(i) + ", " +
                                     std::to_string(k) + ")");
    return SymMatrix(std::move(m));
}

inline nlohmann::json matrix_to_json(const SymMatrix& m)
{
    const auto d = m.matrix().data();
    return {{"dim", m.dim()}, {"data", std::vector<double>(d.begin(), d.end())}};
}

inline nlohmann::json read_json_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw MalformedInput("cannot open '" + path + "'");
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw MalformedInput("invalid JSON in '" + path + "': " + e.what());
    }
}

} // namespace wpc
