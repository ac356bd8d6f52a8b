#ifndef HOLOPATCH_TEST_FIXTURES_HPP
#define HOLOPATCH_TEST_FIXTURES_HPP

#include <memory>

#include "holopatch/compact.hpp"
#include "holopatch/good_pair.hpp"

namespace hp = holopatch;

inline std::shared_ptr<const hp::DiscretizedCompact> disk_compact(hp::cplx c, double r, double h) {
    return std::make_shared<hp::DiscretizedCompact>(
        hp::build_compact({hp::make_disk(c, r)}, h));
}

inline std::shared_ptr<const hp::DiscretizedCompact> rect_compact(hp::cplx lo, hp::cplx hi,
                                                                  double h) {
    return std::make_shared<hp::DiscretizedCompact>(
        hp::build_compact({hp::make_rectangle(lo, hi)}, h));
}

inline std::shared_ptr<const hp::DiscretizedCompact> annulus_compact(double r0, double r1,
                                                                     double h) {
    return std::make_shared<hp::DiscretizedCompact>(hp::build_compact(
        {hp::make_circle_boundary({0, 0}, r1, +1), hp::make_circle_boundary({0, 0}, r0, -1)}, h));
}

/// The unit-disk pair used across the splitting fixtures.
struct DiskPair {
    std::shared_ptr<const hp::DiscretizedCompact> k1, k2;
    std::shared_ptr<const hp::GoodPairContext> ctx;
    explicit DiskPair(double h) {
        k1 = disk_compact({-0.5, 0.0}, 1.0, h);
        k2 = disk_compact({0.5, 0.0}, 1.0, h);
        ctx = std::make_shared<hp::GoodPairContext>(hp::validate_good_pair(k1, k2));
    }
};

/// The rectangle pair with separation 0.5.
struct RectPair {
    std::shared_ptr<const hp::DiscretizedCompact> k1, k2;
    std::shared_ptr<const hp::GoodPairContext> ctx;
    explicit RectPair(double h) {
        k1 = rect_compact({0.0, 0.0}, {1.0, 1.0}, h);
        k2 = rect_compact({0.5, 0.0}, {1.5, 1.0}, h);
        ctx = std::make_shared<hp::GoodPairContext>(hp::validate_good_pair(k1, k2));
    }
};

#endif
