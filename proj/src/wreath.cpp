#include "graphwalk/wreath.hpp"

#include <algorithm>
#include <cstring>

namespace graphwalk {

std::int64_t Configuration::at(std::int64_t lamp) const {
    auto it = std::lower_bound(
        entries.begin(), entries.end(), lamp,
        [](const auto& e, std::int64_t key) { return e.first < key; });
    return (it != entries.end() && it->first == lamp) ? it->second : 0;
}

void Configuration::set(std::int64_t lamp, std::int64_t value) {
    auto it = std::lower_bound(
        entries.begin(), entries.end(), lamp,
        [](const auto& e, std::int64_t key) { return e.first < key; });
    const bool present = it != entries.end() && it->first == lamp;
    if (value == 0) {
        if (present) entries.erase(it);
    } else if (present) {
        it->second = value;
    } else {
        entries.insert(it, {lamp, value});
    }
}

namespace {

void put_i64(std::string& out, std::int64_t v) {
    for (int i = 0; i < 8; ++i)
        out.push_back(char((std::uint64_t(v) >> (8 * i)) & 0xff));
}

std::int64_t get_i64(const std::string& in, std::size_t pos) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
        v |= std::uint64_t(std::uint8_t(in[pos + std::size_t(i)])) << (8 * i);
    return std::int64_t(v);
}

}  // namespace

std::string encode_vertex(const WreathVertex& v) {
    std::string out;
    out.reserve(8 + 16 * v.config.entries.size());
    put_i64(out, v.base);
    for (const auto& [lamp, value] : v.config.entries) {
        put_i64(out, lamp);
        put_i64(out, value);
    }
    return out;
}

WreathVertex decode_vertex(const std::string& key) {
    if (key.size() < 8 || (key.size() - 8) % 16 != 0)
        throw Error("decode_vertex: malformed key");
    WreathVertex v;
    v.base = get_i64(key, 0);
    for (std::size_t pos = 8; pos < key.size(); pos += 16)
        v.config.entries.emplace_back(get_i64(key, pos),
                                      get_i64(key, pos + 8));
    return v;
}

std::vector<std::int64_t> OrdinaryWreathGraph::fiber_moves(std::int64_t l,
                                                           std::int64_t c) {
    if (l == FiberFamily::kHuge) return {c - 1, c + 1};  // line regime
    if (l == 1) return {};
    if (l == 2) return {1 - c};
    return {(c + 1) % l, (c + l - 1) % l};
}

std::vector<WreathVertex> OrdinaryWreathGraph::neighbors(
    const Vertex& v) const {
    std::vector<Vertex> out;
    out.reserve(4);
    for (const std::int64_t b : {v.base - 1, v.base + 1})
        out.push_back({b, v.config});
    const std::int64_t l = fibers_.size_or_huge(v.base);
    const std::int64_t c = v.config.at(v.base);
    for (const std::int64_t w : fiber_moves(l, c)) {
        Vertex u = v;
        u.config.set(v.base, w);
        out.push_back(std::move(u));
    }
    return out;
}

std::vector<WreathVertex> GeneralizedWreathGraph::neighbors(
    const Vertex& v) const {
    // class_of throws OutOfRange when the base leaves the built range.
    const std::int64_t lamp = partition_->class_of(v.base);
    partition_->class_of(v.base - 1);
    partition_->class_of(v.base + 1);
    std::vector<Vertex> out;
    out.reserve(4);
    for (const std::int64_t b : {v.base - 1, v.base + 1})
        out.push_back({b, v.config});
    const std::int64_t c = v.config.at(lamp);
    for (const std::int64_t w :
         OrdinaryWreathGraph::fiber_moves(fiber_size_, c)) {
        Vertex u = v;
        u.config.set(lamp, w);
        out.push_back(std::move(u));
    }
    return out;
}

ConfinementSet confinement_set(const OrdinaryWreathGraph& g, std::int64_t r) {
    ConfinementSet set;
    set.radius = r;
    const FiberFamily fam = g.fibers();
    set.contains = [fam, r](const WreathVertex& v) {
        if (v.base < -r || v.base > r) return false;
        for (const auto& [lamp, value] : v.config.entries) {
            if (lamp < -r || lamp > r) return false;
            const std::int64_t l = fam.size_or_huge(lamp);
            if (l != FiberFamily::kHuge && (value < 0 || value >= l))
                return false;
        }
        return true;
    };
    set.log2_size = std::log2(double(2 * r + 1));
    set.size = 2 * r + 1;
    set.size_exact = true;
    for (std::int64_t z = -r; z <= r; ++z) {
        set.log2_size += fam.log2_size(z);
        if (set.size_exact) {
            const std::int64_t l = fam.size_or_huge(z);
            if (l == FiberFamily::kHuge)
                set.size_exact = false;
            else
                set.size *= l;
        }
    }
    return set;
}

ConfinementSet confinement_set(const GeneralizedWreathGraph& g,
                               std::int64_t r) {
    ConfinementSet set;
    set.radius = r;
    const DyadicPartition& part = g.partition();
    const std::int64_t l = g.fiber_size();

    // Classes reachable from [-r, r]: supp(f) must lie inside phi([-r,r]).
    const auto stats = part.window_stats(-r, 2 * r + 1);
    std::vector<std::int64_t> classes;
    classes.reserve(stats.sizes.size());
    for (const auto& [cls, sz] : stats.sizes) classes.push_back(cls);

    set.contains = [classes, l, r](const WreathVertex& v) {
        if (v.base < -r || v.base > r) return false;
        for (const auto& [lamp, value] : v.config.entries) {
            if (!std::binary_search(classes.begin(), classes.end(), lamp))
                return false;
            if (value < 0 || value >= l) return false;
        }
        return true;
    };
    // |G_r| = (2r+1) * l^{N(-r, r)}.
    const double n_classes = double(stats.classes_touched);
    set.log2_size =
        std::log2(double(2 * r + 1)) + n_classes * std::log2(double(l));
    set.size = BigInt(2 * r + 1) * pow(BigInt(l),
                                       unsigned(stats.classes_touched));
    set.size_exact = true;
    return set;
}

}  // namespace graphwalk
