#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "graphwalk/rng.hpp"
#include "graphwalk/wreath.hpp"

using namespace graphwalk;

namespace {

GrowthFunction hand_growth() {
    // g(1)=1, g(2)=2, g(4)=3, g(8)=4: the hand-traced partition extended
    // one level so that windows around the origin stay in range.
    return GrowthFunction::from_table("hand8", {1, 2, 2, 3, 3, 3, 3, 4});
}

template <class G>
bool neighbors_symmetric_along_walk(const G& g, int steps, std::uint64_t seed) {
    Rng rng(seed);
    WreathVertex v = wreath_origin();
    for (int t = 0; t < steps; ++t) {
        const auto nb = g.neighbors(v);
        std::set<WreathVertex> dedup(nb.begin(), nb.end());
        if (dedup.size() != nb.size()) return false;
        if (std::int64_t(nb.size()) > g.valency_bound()) return false;
        for (const auto& w : nb) {
            const auto back = g.neighbors(w);
            if (std::find(back.begin(), back.end(), v) == back.end())
                return false;
        }
        v = nb[rng.pick(std::uint32_t(nb.size()))];
    }
    return true;
}

}  // namespace

TEST_CASE("ordinary Z wr Z/2Z at the origin has 3 neighbors") {
    OrdinaryWreathGraph g(FiberFamily::constant(2));
    const auto nb = g.neighbors(wreath_origin());
    REQUIRE(nb.size() == 3);

    WreathVertex left{-1, {}}, right{1, {}};
    WreathVertex flipped{0, {}};
    flipped.config.set(0, 1);
    CHECK(std::count(nb.begin(), nb.end(), left) == 1);
    CHECK(std::count(nb.begin(), nb.end(), right) == 1);
    CHECK(std::count(nb.begin(), nb.end(), flipped) == 1);
}

TEST_CASE("ordinary with 3-cycles at the origin has 4 neighbors") {
    OrdinaryWreathGraph g(FiberFamily::from_alpha(1.0 / 3.0));
    const auto nb = g.neighbors(wreath_origin());
    REQUIRE(nb.size() == 4);
    int base_moves = 0, lamp_moves = 0;
    for (const auto& w : nb) {
        if (w.base != 0) ++base_moves;
        else ++lamp_moves;
    }
    CHECK(base_moves == 2);
    CHECK(lamp_moves == 2);  // lamp values 1 and 2 on the 3-cycle
}

TEST_CASE("ordinary valency is base degree plus fiber degree") {
    OrdinaryWreathGraph g(FiberFamily::from_alpha(0.5));
    Rng rng(3);
    WreathVertex v = wreath_origin();
    for (int t = 0; t < 200; ++t) {
        const auto nb = g.neighbors(v);
        const std::int64_t l = g.fibers().size_or_huge(v.base);
        const std::int64_t fiber_deg = cycle_degree(l);
        CHECK(std::int64_t(nb.size()) == 2 + fiber_deg);
        v = nb[rng.pick(std::uint32_t(nb.size()))];
    }
}

TEST_CASE("generalized: shared lamps move the same class coordinate") {
    const auto part = DyadicPartition::build(hand_growth(), 3);
    GeneralizedWreathGraph g(part, 2);

    // Base points 2 and 4 share the class of the hand-traced example.
    REQUIRE(part.class_of(2) == part.class_of(4));
    const std::int32_t shared = part.class_of(2);

    WreathVertex at2{2, {}}, at4{4, {}};
    auto lamp_targets = [&](const WreathVertex& v) {
        std::set<Configuration> configs;
        for (const auto& w : g.neighbors(v))
            if (w.base == v.base) configs.insert(w.config);
        return configs;
    };
    const auto c2 = lamp_targets(at2);
    const auto c4 = lamp_targets(at4);
    CHECK(c2 == c4);
    REQUIRE(c2.size() == 1);
    CHECK(c2.begin()->at(shared) == 1);
}

TEST_CASE("generalized valency is constant (measured value 3)") {
    const auto part = DyadicPartition::build(GrowthFunction::power(0.5), 10);
    GeneralizedWreathGraph g(part, 2);
    Rng rng(11);
    WreathVertex v = wreath_origin();
    for (int t = 0; t < 500; ++t) {
        const auto nb = g.neighbors(v);
        CHECK(nb.size() == 3);
        v = nb[rng.pick(std::uint32_t(nb.size()))];
    }
}

TEST_CASE("generalized base leaving the built range raises OutOfRange") {
    const auto part = DyadicPartition::build(hand_growth(), 3);
    GeneralizedWreathGraph g(part, 2);
    WreathVertex at_edge{part.range_max(), {}};
    CHECK_THROWS_AS(g.neighbors(at_edge), OutOfRange);
}

TEST_CASE("lamp-sharing commutes with base moves inside a class") {
    const auto part = DyadicPartition::build(hand_growth(), 3);
    GeneralizedWreathGraph g(part, 2);
    // Walk base 2 -> 3 -> 4, then toggle; vs toggle at 2, then walk.
    WreathVertex v{2, {}};
    WreathVertex toggled_then_walked = v;
    toggled_then_walked.config.set(part.class_of(2), 1);
    toggled_then_walked.base = 4;

    WreathVertex walked_then_toggled{4, {}};
    walked_then_toggled.config.set(part.class_of(4), 1);
    CHECK(toggled_then_walked == walked_then_toggled);
}

TEST_CASE("neighbor symmetry along random walks, both modes") {
    OrdinaryWreathGraph ord(FiberFamily::from_alpha(0.5));
    CHECK(neighbors_symmetric_along_walk(ord, 3000, 17));

    const auto part = DyadicPartition::build(GrowthFunction::power(0.5), 12);
    GeneralizedWreathGraph gen(part, 2);
    CHECK(neighbors_symmetric_along_walk(gen, 3000, 18));
}

TEST_CASE("encode/decode: fixed origin key, round trip, no collisions") {
    CHECK(encode_vertex(wreath_origin()) == std::string(8, '\0'));
    CHECK(decode_vertex(encode_vertex(wreath_origin())) == wreath_origin());

    WreathVertex a{3, {}}, b{3, {}};
    a.config.set(1, 1);
    b.config.set(1, 2);
    CHECK(encode_vertex(a) != encode_vertex(b));

    OrdinaryWreathGraph g(FiberFamily::from_alpha(0.5));
    Rng rng(23);
    std::set<std::string> keys;
    std::set<WreathVertex> verts;
    WreathVertex v = wreath_origin();
    for (int t = 0; t < 100000; ++t) {
        verts.insert(v);
        keys.insert(encode_vertex(v));
        CHECK(decode_vertex(encode_vertex(v)) == v);
        const auto nb = g.neighbors(v);
        v = nb[rng.pick(std::uint32_t(nb.size()))];
    }
    CHECK(keys.size() == verts.size());
}

TEST_CASE("confinement sets: ordinary") {
    OrdinaryWreathGraph lamp(FiberFamily::constant(2));
    const auto a0 = confinement_set(lamp, 0);
    CHECK(a0.size_exact);
    CHECK(a0.size == 2);  // l(0) = 2
    CHECK(a0.contains(wreath_origin()));
    WreathVertex lit = wreath_origin();
    lit.config.set(0, 1);
    CHECK(a0.contains(lit));
    lit.config.set(1, 1);
    CHECK_FALSE(a0.contains(lit));

    // Exhaustive count at small radius: (2r+1) * prod l(z) states.
    for (const std::int64_t r : {1, 2, 3}) {
        const auto set = confinement_set(lamp, r);
        std::int64_t brute = 0;
        const std::int64_t span = 2 * r + 1;
        for (std::int64_t a = -r; a <= r; ++a) {
            for (std::int64_t mask = 0; mask < (std::int64_t(1) << span);
                 ++mask) {
                WreathVertex v{a, {}};
                for (std::int64_t i = 0; i < span; ++i)
                    if (mask & (std::int64_t(1) << i))
                        v.config.set(i - r, 1);
                if (set.contains(v)) ++brute;
            }
        }
        CHECK(BigInt(brute) == set.size);
        CHECK(set.log2_size ==
              doctest::Approx(log2_big(set.size)).epsilon(1e-9));
    }
}

TEST_CASE("confinement sets: generalized counts match enumeration") {
    const auto part = DyadicPartition::build(hand_growth(), 3);
    GeneralizedWreathGraph g(part, 2);
    for (const std::int64_t r : {1, 2, 4, 6}) {
        const auto set = confinement_set(g, r);
        const auto stats = part.window_stats(-r, 2 * r + 1);
        CHECK(set.size ==
              BigInt(2 * r + 1) *
                  pow(BigInt(2), unsigned(stats.classes_touched)));

        // Brute enumeration over base position and class configurations.
        std::vector<std::int32_t> classes;
        for (const auto& [cls, sz] : stats.sizes) classes.push_back(cls);
        std::int64_t brute = 0;
        for (std::int64_t a = -r; a <= r; ++a) {
            for (std::int64_t mask = 0;
                 mask < (std::int64_t(1) << classes.size()); ++mask) {
                WreathVertex v{a, {}};
                for (std::size_t i = 0; i < classes.size(); ++i)
                    if (mask & (std::int64_t(1) << i))
                        v.config.set(classes[i], 1);
                if (set.contains(v)) ++brute;
            }
        }
        CHECK(BigInt(brute) == set.size);
    }
}
