#include "wflow/geometry.hpp"

namespace wflow {

bool point_on_segment(Point2 p, Point2 a, Point2 b, double eps) {
    double cross = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
    double len = std::hypot(b.x - a.x, b.y - a.y);
    if (len < eps) return dist2(p, a) < eps;
    if (std::fabs(cross) / len > eps) return false;
    double dot = (p.x - a.x) * (b.x - a.x) + (p.y - a.y) * (b.y - a.y);
    return dot >= -eps * len && dot <= len * len + eps * len;
}

bool point_in_polygon(const Polygon& poly, Point2 p) {
    size_t n = poly.size();
    if (n < 3) return false;
    for (size_t i = 0, j = n - 1; i < n; j = i++)
        if (point_on_segment(p, poly[j], poly[i])) return true;
    bool inside = false;
    for (size_t i = 0, j = n - 1; i < n; j = i++) {
        if ((poly[i].y > p.y) != (poly[j].y > p.y) &&
            p.x < (poly[j].x - poly[i].x) * (p.y - poly[i].y) / (poly[j].y - poly[i].y) + poly[i].x)
            inside = !inside;
    }
    return inside;
}

Point2 polygon_centroid(const Polygon& poly) {
    size_t n = poly.size();
    if (n == 0) return {};
    double area2 = 0.0, cx = 0.0, cy = 0.0;
    for (size_t i = 0, j = n - 1; i < n; j = i++) {
        double w = poly[j].x * poly[i].y - poly[i].x * poly[j].y;
        area2 += w;
        cx += (poly[j].x + poly[i].x) * w;
        cy += (poly[j].y + poly[i].y) * w;
    }
    if (std::fabs(area2) < 1e-12) {
        double sx = 0.0, sy = 0.0;
        for (const auto& p : poly) {
            sx += p.x;
            sy += p.y;
        }
        return {sx / static_cast<double>(n), sy / static_cast<double>(n)};
    }
    return {cx / (3.0 * area2), cy / (3.0 * area2)};
}

}  // namespace wflow
