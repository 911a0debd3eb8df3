#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "graphwalk/fibers.hpp"
#include "graphwalk/graph.hpp"
#include "graphwalk/numeric.hpp"
#include "graphwalk/partition.hpp"

namespace graphwalk {

// Finite-support lamp configuration, stored as a sorted association list.
// Canonical: entries equal to the fiber origin 0 are erased, so the null
// configuration has empty support and equality is structural.
struct Configuration {
    std::vector<std::pair<std::int64_t, std::int64_t>> entries;

    std::int64_t at(std::int64_t lamp) const;
    void set(std::int64_t lamp, std::int64_t value);
    bool empty() const { return entries.empty(); }
    std::size_t support_size() const { return entries.size(); }

    auto operator<=>(const Configuration&) const = default;
};

struct WreathVertex {
    std::int64_t base = 0;
    Configuration config;

    auto operator<=>(const WreathVertex&) const = default;
};

inline WreathVertex wreath_origin() { return WreathVertex{}; }

// Injective stable byte-string key (8-byte little-endian base, then one
// 16-byte record per support entry).
std::string encode_vertex(const WreathVertex& v);
WreathVertex decode_vertex(const std::string& key);

// Ordinary wreath product Z wr B'_z: one lamp per base vertex, lamp moved
// at the walker's position.  Fibers beyond the size budget are represented
// as lines (a walk of length n cannot tell a cycle of l > n from Z).
class OrdinaryWreathGraph {
  public:
    using Vertex = WreathVertex;

    explicit OrdinaryWreathGraph(FiberFamily fibers)
        : fibers_(std::move(fibers)) {}

    std::vector<Vertex> neighbors(const Vertex& v) const;
    int valency_bound() const { return 4; }

    const FiberFamily& fibers() const { return fibers_; }

    // Fiber neighbors of value c in the (possibly huge) cycle of size l.
    static std::vector<std::int64_t> fiber_moves(std::int64_t l,
                                                 std::int64_t c);

  private:
    FiberFamily fibers_;
};

// Generalized wreath product Z wr_A B: lamps are partition classes, the
// lamp touched at base vertex a is class_of(a).  Fiber is a constant cycle
// (Z/2Z in the construction; any constant size is accepted).
class GeneralizedWreathGraph {
  public:
    using Vertex = WreathVertex;

    GeneralizedWreathGraph(const DyadicPartition& partition,
                           std::int64_t fiber_size = 2)
        : partition_(&partition), fiber_size_(fiber_size) {}

    std::vector<Vertex> neighbors(const Vertex& v) const;
    int valency_bound() const {
        return 2 + (fiber_size_ <= 1 ? 0 : fiber_size_ == 2 ? 1 : 2);
    }

    const DyadicPartition& partition() const { return *partition_; }
    std::int64_t fiber_size() const { return fiber_size_; }

  private:
    const DyadicPartition* partition_;
    std::int64_t fiber_size_;
};

// Membership predicate and exact cardinality data for the confinement sets
// A_r (ordinary) and G_r (generalized).
struct ConfinementSet {
    std::int64_t radius = 0;
    std::function<bool(const WreathVertex&)> contains;
    double log2_size = 0.0;
    BigInt size;       // meaningful only when size_exact
    bool size_exact = false;
};

ConfinementSet confinement_set(const OrdinaryWreathGraph& g, std::int64_t r);
ConfinementSet confinement_set(const GeneralizedWreathGraph& g,
                               std::int64_t r);

}  // namespace graphwalk
