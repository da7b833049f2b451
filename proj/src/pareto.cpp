#include "mocoguard/pareto.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "mocoguard/errors.hpp"

namespace mocoguard {

bool dominates(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size()) throw ShapeError("dominates: vectors differ in length");
    bool strict = false;
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (u[i] > v[i]) return false;
        if (u[i] < v[i]) strict = true;
    }
    return strict;
}

std::vector<ObjectiveVector> nondominated_filter(std::vector<ObjectiveVector> points) {
    std::sort(points.begin(), points.end());
    points.erase(std::unique(points.begin(), points.end()), points.end());
    // A dominator is lexicographically smaller, so a single forward pass
    // against the kept set suffices.
    std::vector<ObjectiveVector> front;
    for (auto& p : points) {
        const bool dominated =
            std::any_of(front.begin(), front.end(), [&](const ObjectiveVector& q) { return dominates(q, p); });
        if (!dominated) front.push_back(std::move(p));
    }
    return front;
}

namespace {

struct P2 {
    double x, y;
};

double hv2d(std::vector<P2> pts, double rx, double ry) {
    std::sort(pts.begin(), pts.end(), [](const P2& a, const P2& b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
    double area = 0.0;
    double prev_y = ry;
    for (const auto& p : pts) {
        if (p.y < prev_y) {
            area += (rx - p.x) * (prev_y - p.y);
            prev_y = p.y;
        }
    }
    return area;
}

}  // namespace

double hypervolume(std::span<const ObjectiveVector> points, std::span<const double> reference,
                   std::size_t* dropped) {
    const std::size_t m = reference.size();
    if (m != 2 && m != 3) throw ConfigError("hypervolume supports 2 or 3 objectives, got " + std::to_string(m));
    std::vector<const ObjectiveVector*> inside;
    std::size_t out = 0;
    for (const auto& p : points) {
        if (p.size() != m) throw ShapeError("hypervolume: point dimension differs from reference");
        bool ok = true;
        for (std::size_t i = 0; i < m; ++i) ok = ok && p[i] <= reference[i];
        if (ok)
            inside.push_back(&p);
        else
            ++out;
    }
    if (dropped) *dropped = out;
    if (inside.empty()) return 0.0;

    if (m == 2) {
        std::vector<P2> pts;
        for (const auto* p : inside) pts.push_back({(*p)[0], (*p)[1]});
        return hv2d(std::move(pts), reference[0], reference[1]);
    }

    // Sweep along the third objective; each slab is a 2D problem.
    std::sort(inside.begin(), inside.end(), [](const auto* a, const auto* b) { return (*a)[2] < (*b)[2]; });
    double volume = 0.0;
    std::vector<P2> slab;
    for (std::size_t i = 0; i < inside.size(); ++i) {
        slab.push_back({(*inside[i])[0], (*inside[i])[1]});
        const double z = (*inside[i])[2];
        const double z_next = i + 1 < inside.size() ? (*inside[i + 1])[2] : reference[2];
        if (z_next > z) volume += hv2d(slab, reference[0], reference[1]) * (z_next - z);
    }
    return volume;
}

double hv_gap(double hv_ref, double hv_model) {
    if (!(hv_ref > 0.0)) throw ConfigError("hv_gap: reference hypervolume must be positive");
    return (hv_ref - hv_model) / hv_ref * 100.0;
}

ObjectiveVector reference_point(std::span<const std::vector<ObjectiveVector>> fronts) {
    ObjectiveVector nadir, ideal;
    for (const auto& front : fronts)
        for (const auto& p : front) {
            if (nadir.empty()) {
                nadir = p;
                ideal = p;
            }
            if (p.size() != nadir.size()) throw ShapeError("reference_point: mixed dimensions");
            for (std::size_t i = 0; i < p.size(); ++i) {
                nadir[i] = std::max(nadir[i], p[i]);
                ideal[i] = std::min(ideal[i], p[i]);
            }
        }
    if (nadir.empty()) throw ConfigError("reference_point: no points");
    ObjectiveVector r(nadir.size());
    for (std::size_t i = 0; i < r.size(); ++i) {
        double margin = 0.1 * std::abs(nadir[i]);
        if (margin == 0.0) margin = 0.1 * (nadir[i] - ideal[i]);
        if (margin == 0.0) margin = 0.1;
        r[i] = nadir[i] + margin;
    }
    return r;
}

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

namespace {

double parse_double(const std::string& s) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw SchemaError("bad number '" + s + "'");
    return v;
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
}

}  // namespace

void write_front_csv(const std::filesystem::path& path, const Front& front) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw SchemaError("cannot write " + path.string());
    const std::size_t m = front.reference.size();
    out << "tag";
    for (std::size_t i = 0; i < m; ++i) out << ",f" << (i + 1);
    out << "\nref";
    for (double v : front.reference) out << ',' << format_double(v);
    out << '\n';
    for (const auto& p : front.points) {
        if (p.size() != m) throw ShapeError("front point dimension differs from reference");
        out << "point";
        for (double v : p) out << ',' << format_double(v);
        out << '\n';
    }
}

Front read_front_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw SchemaError("empty front file");
    const auto header = split(line);
    if (header.size() < 2 || header[0] != "tag") throw SchemaError("front header must start with 'tag'");
    const std::size_t m = header.size() - 1;
    Front front;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = split(line);
        if (cells.size() != m + 1) throw SchemaError("front row has wrong column count");
        ObjectiveVector v;
        for (std::size_t i = 1; i < cells.size(); ++i) v.push_back(parse_double(cells[i]));
        if (cells[0] == "ref")
            front.reference = std::move(v);
        else if (cells[0] == "point")
            front.points.push_back(std::move(v));
        else
            throw SchemaError("unknown front row tag '" + cells[0] + "'");
    }
    if (front.reference.size() != m) throw SchemaError("front file lacks a ref row");
    return front;
}

}  // namespace mocoguard
