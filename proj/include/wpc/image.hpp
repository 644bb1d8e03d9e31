#pragma once

//
// Grayscale raster in [0,1] with PGM (P2/P5, maxval <= 255) input and output.
//

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"

namespace wpc {

struct ImageBuffer
{
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<double> pixels; // row-major

    ImageBuffer() = default;
    ImageBuffer(std::size_t w, std::size_t h, double fill = 0.0)
        : width(w), height(h), pixels(w * h, fill)
    {
        if (w == 0 || h == 0)
            throw InvalidConfig("image dimensions must be positive");
    }

    double& at(std::size_t r, std::size_t c) { return pixels[r * width + c]; }
    double at(std::size_t r, std::size_t c) const { return pixels[r * width + c]; }

    friend bool operator==(const ImageBuffer&, const ImageBuffer&) = default;
};

inline std::uint8_t quantize(double v)
{
    const double c = std::clamp(v, 0.0, 1.0);
    return static_cast<std::uint8_t>(std::floor(c * 255.0 + 0.5));
}

namespace detail {

// Next header token, skipping whitespace and '#' comments.
inline std::string pgm_token(std::istream& in)
{
    std::string tok;
    int ch;
    while ((ch = in.get()) != EOF) {
        if (ch == '#') {
            while ((ch = in.get()) != EOF && ch != '\n')
                ;
            continue;
        }
        if (std::isspace(ch)) {
            if (!tok.empty())
                break;
            continue;
        }
        tok.push_back(char(ch));
    }
    if (tok.empty())
        throw MalformedInput("PGM header ended early");
    return tok;
}

inline std::size_t pgm_number(std::istream& in, const char* what)
{
    const std::string tok = pgm_token(in);
    if (!std::all_of(tok.begin(), tok.end(), [](char c) { return std::isdigit((unsigned char)c); }))
        throw MalformedInput(std::string("PGM ") + what + " is not a number: '" + tok + "'");
    return std::stoul(tok);
}

} // namespace detail

inline ImageBuffer read_pgm(std::istream& in)
{
    const std::string magic = detail::pgm_token(in);
    if (magic == "P3" || magic == "P6")
        throw MalformedInput("color images are not supported; convert to grayscale PGM");
    if (magic != "P2" && magic != "P5")
        throw MalformedInput("not a PGM file (magic '" + magic + "')");

    const std::size_t w = detail::pgm_number(in, "width");
    const std::size_t h = detail::pgm_number(in, "height");
    const std::size_t maxval = detail::pgm_number(in, "maxval");
    if (w == 0 || h == 0)
        throw MalformedInput("PGM dimensions must be positive");
    if (maxval == 0 || maxval > 255)
        throw MalformedInput("only 8-bit PGM is supported (maxval " + std::to_string(maxval) + ")");

    ImageBuffer img(w, h);
    if (magic == "P5") {
        std::vector<char> raw(w * h);
        in.read(raw.data(), std::streamsize(raw.size()));
        if (std::size_t(in.gcount()) != raw.size())
            throw MalformedInput("PGM raster is truncated");
        for (std::size_t i = 0; i < raw.size(); ++i) {
            const auto v = static_cast<unsigned char>(raw[i]);
            if (v > maxval)
                throw MalformedInput("PGM sample exceeds maxval");
            img.pixels[i] = double(v) / double(maxval);
        }
    } else {
        for (std::size_t i = 0; i < w * h; ++i) {
            std::size_t v;
            try {
                v = detail::pgm_number(in, "sample");
            } catch (const MalformedInput&) {
                throw MalformedInput("PGM raster is truncated or malformed");
            }
            if (v > maxval)
                throw MalformedInput("PGM sample exceeds maxval");
            img.pixels[i] = double(v) / double(maxval);
        }
    }
    return img;
}

inline ImageBuffer read_pgm(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw MalformedInput("cannot open image '" + path + "'");
    return read_pgm(in);
}

// Clips to [0,1] and quantizes round-half-up to 8 bits.
inline void write_pgm(std::ostream& out, const ImageBuffer& img, bool binary = true)
{
    out << (binary ? "P5" : "P2") << '\n' << img.width << ' ' << img.height << "\n255\n";
    if (binary) {
        std::vector<char> raw(img.pixels.size());
        for (std::size_t i = 0; i < raw.size(); ++i)
            raw[i] = static_cast<char>(quantize(img.pixels[i]));
        out.write(raw.data(), std::streamsize(raw.size()));
    } else {
        for (std::size_t r = 0; r < img.height; ++r) {
            for (std::size_t c = 0; c < img.width; ++c)
                out << (c ? " " : "") << int(quantize(img.at(r, c)));
            out << '\n';
        }
    }
}

inline void write_pgm(const std::string& path, const ImageBuffer& img, bool binary = true)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw MalformedInput("cannot write image '" + path + "'");
    write_pgm(out, img, binary);
}

// Round trip through 8-bit quantization.
inline ImageBuffer quantized(const ImageBuffer& img)
{
    ImageBuffer q = img;
    for (double& v : q.pixels)
        v = double(quantize(v)) / 255.0;
    return q;
}

struct Psnr
{
    double db = 0.0;
    bool capped = false; // identical images
};

inline constexpr double psnr_cap_db = 99.0;

inline Psnr psnr(const ImageBuffer& a, const ImageBuffer& b)
{
    if (a.width != b.width || a.height != b.height)
        throw DimensionMismatch("PSNR of images with different sizes");
    double se = 0.0;
    for (std::size_t i = 0; i < a.pixels.size(); ++i) {
        const double d = a.pixels[i] - b.pixels[i];
        se += d * d;
    }
    const double mse = se / double(a.pixels.size());
    if (mse == 0.0)
        return {psnr_cap_db, true};
    return {std::min(psnr_cap_db, 10.0 * std::log10(1.0 / mse)), false};
}

// i.i.d. N(0, sigma^2) per pixel from a seeded 64-bit Mersenne twister.
inline ImageBuffer add_gaussian_noise(const ImageBuffer& img, double sigma, std::uint64_t seed)
{
    if (!(sigma >= 0.0))
        throw InvalidConfig("noise sigma must be nonnegative");
    ImageBuffer out = img;
    if (sigma == 0.0)
        return out;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, sigma);
    for (double& v : out.pixels)
        v += normal(rng);
    return out;
}

//
// Piecewise-smooth test scene: a smooth diagonal gradient with a brighter
// disk and a darker rectangle cut into it.
//
inline ImageBuffer synthetic_scene(std::size_t width, std::size_t height)
{
    ImageBuffer img(width, height);
    const double w = double(width), h = double(height);
    for (std::size_t r = 0; r < height; ++r)
        for (std::size_t c = 0; c < width; ++c) {
            const double x = (double(c) + 0.5) / w;
            const double y = (double(r) + 0.5) / h;
            double v = 0.25 + 0.3 * x + 0.15 * y + 0.05 * std::sin(3.0 * x + 2.0 * y);
            const double dx = x - 0.62, dy = y - 0.38;
            if (dx * dx + dy * dy < 0.05)
                v = 0.85 - 0.2 * (dx * dx + dy * dy) / 0.05;
            if (x > 0.12 && x < 0.42 && y > 0.55 && y < 0.88)
                v = 0.12 + 0.1 * y;
            img.at(r, c) = v;
        }
    return img;
}

} // namespace wpc
