#pragma once

#include <cmath>
#include <vector>

namespace wflow {

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

struct Point3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
};

// closed simple polygon; the edge from back() to front() is implicit
using Polygon = std::vector<Point2>;

inline double dist2(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

inline double dist3(Point3 a, Point3 b) {
    return std::sqrt((a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y) +
                     (a.z - b.z) * (a.z - b.z));
}

bool point_on_segment(Point2 p, Point2 a, Point2 b, double eps = 1e-9);

// ray casting; points on an edge count as inside
bool point_in_polygon(const Polygon& poly, Point2 p);

// area-weighted centroid (shoelace); falls back to vertex mean for degenerate polygons
Point2 polygon_centroid(const Polygon& poly);

struct BoundingBox {
    double min_x = 0.0, min_y = 0.0, max_x = 0.0, max_y = 0.0;
    void expand(Point2 p) {
        min_x = std::min(min_x, p.x);
        min_y = std::min(min_y, p.y);
        max_x = std::max(max_x, p.x);
        max_y = std::max(max_y, p.y);
    }
};

}  // namespace wflow
