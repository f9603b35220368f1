// SPDX-License-Identifier: MIT
//
// Measure file format: a line-oriented text document carrying the model
// parameters and, per support point, the weight and the complex entries of
// the two factors (row-major, "re,im" pairs, 17 significant digits, exact
// decimal round-trip).
//
//   cvpmeasure 1
//   k 2
//   n 1
//   points 2
//   point 0
//   weight 5.0000000000000000e-01
//   a 1.4142135623730951,0 0,0
//   b 0,0 0,0
//   point 1
//   ...

#pragma once

#include "measures.hpp"
#include "textio.hpp"

#include <string>
#include <utility>
#include <vector>

namespace cvp {

inline std::string write_measure_text(const DiscreteMeasure& rho) {
    if (rho.size() == 0) throw std::invalid_argument("write_measure_text: empty measure");
    const ModelParams mp = rho.points.front().params();
    std::string out;
    out += "cvpmeasure 1\n";
    out += "k " + std::to_string(mp.k) + "\n";
    out += "n " + std::to_string(mp.n) + "\n";
    out += "points " + std::to_string(rho.size()) + "\n";
    for (std::size_t i = 0; i < rho.size(); ++i) {
        out += "point " + std::to_string(i) + "\n";
        out += "weight " + fmt17(rho.weights(static_cast<Eigen::Index>(i))) + "\n";
        for (const char* tag : {"a", "b"}) {
            const CMatrix& m =
                tag[0] == 'a' ? rho.points[i].a_factor() : rho.points[i].b_factor();
            out += tag;
            for (int r = 0; r < mp.k; ++r)
                for (int c = 0; c < mp.n; ++c) {
                    const Complex v = m(r, c);
                    out += " " + fmt17(v.real()) + "," + fmt17(v.imag());
                }
            out += "\n";
        }
    }
    return out;
}

namespace detail {

inline Complex parse_complex_pair(const std::string& tok, const std::string& what) {
    const auto comma = tok.find(',');
    if (comma == std::string::npos)
        throw std::runtime_error("expected 're,im' pair for " + what + ": '" + tok + "'");
    return Complex(parse_double(tok.substr(0, comma), what + " (real part)"),
                   parse_double(tok.substr(comma + 1), what + " (imaginary part)"));
}

} // namespace detail

inline DiscreteMeasure parse_measure_text(const std::string& text) {
    std::vector<std::string> lines;
    {
        std::string cur;
        for (const char ch : text) {
            if (ch == '\n') {
                lines.push_back(cur);
                cur.clear();
            } else {
                cur += ch;
            }
        }
        if (!trim(cur).empty()) lines.push_back(cur);
    }
    std::size_t pos = 0;
    auto next_line = [&]() -> std::vector<std::string> {
        while (pos < lines.size()) {
            const std::string t = trim(lines[pos]);
            ++pos;
            if (t.empty() || t[0] == '#') continue;
            return split_ws(t);
        }
        throw std::runtime_error("measure file: unexpected end of file");
    };
    auto expect = [&](const char* key, int nfield) {
        const auto f = next_line();
        if (f.empty() || f[0] != key || static_cast<int>(f.size()) != nfield + 1)
            throw std::runtime_error(std::string("measure file: expected '") + key +
                                     "' line, got '" + (f.empty() ? "" : f[0]) + "'");
        return f;
    };

    const auto header = expect("cvpmeasure", 1);
    if (header[1] != "1")
        throw std::runtime_error("measure file: unsupported version '" + header[1] + "'");
    const int k = static_cast<int>(parse_int(expect("k", 1)[1], "k"));
    const int n = static_cast<int>(parse_int(expect("n", 1)[1], "n"));
    const ModelParams mp{k, n};
    mp.validate();
    const auto npts = parse_int(expect("points", 1)[1], "points");
    if (npts < 1) throw std::runtime_error("measure file: points must be >= 1");

    DiscreteMeasure rho;
    rho.weights.resize(static_cast<Eigen::Index>(npts));
    for (long long i = 0; i < npts; ++i) {
        const auto pt = expect("point", 1);
        if (parse_int(pt[1], "point index") != i)
            throw std::runtime_error("measure file: point indices must be consecutive");
        rho.weights(static_cast<Eigen::Index>(i)) =
            parse_double(expect("weight", 1)[1], "weight");
        CMatrix fac[2] = {CMatrix(k, n), CMatrix(k, n)};
        for (int which = 0; which < 2; ++which) {
            const char* tag = which == 0 ? "a" : "b";
            const auto f = expect(tag, k * n);
            int idx = 1;
            for (int r = 0; r < k; ++r)
                for (int c = 0; c < n; ++c)
                    fac[which](r, c) = detail::parse_complex_pair(
                        f[static_cast<std::size_t>(idx++)],
                        std::string(tag) + " entry of point " + std::to_string(i));
        }
        rho.points.emplace_back(fac[0], fac[1]);
    }
    if (static_cast<std::size_t>(rho.weights.size()) != rho.points.size())
        throw std::runtime_error("measure file: inconsistent point count");
    return rho;
}

inline void write_measure_file(const std::string& path, const DiscreteMeasure& rho) {
    atomic_write_file(path, write_measure_text(rho));
}

inline DiscreteMeasure read_measure_file(const std::string& path) {
    return parse_measure_text(read_file(path));
}

} // namespace cvp
