#ifndef HOLOPATCH_NERVE_HPP
#define HOLOPATCH_NERVE_HPP

#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>

#include "holopatch/compact.hpp"

namespace holopatch {

// ----------------------------------------------------------------------------
// Nerve graphs of covers, the GF(2) cycle space, and bipartization by edge
// splitting. Covers are index sets into a shared master compact, so element
// intersections are exact.
// ----------------------------------------------------------------------------

struct Cover {
    std::shared_ptr<const DiscretizedCompact> master;
    std::vector<std::vector<std::size_t>> elements;  // sorted sample indices

    std::size_t size() const { return elements.size(); }
};

struct NerveGraph {
    int vertex_count = 0;
    std::vector<std::pair<int, int>> edges;  // (u, v) with u < v, sorted, unique
    std::vector<std::string> labels;         // optional names per vertex

    void add_edge(int u, int v) {
        require(u != v, "nerve: loops are not allowed");
        if (u > v) std::swap(u, v);
        edges.emplace_back(u, v);
    }
    void normalize() {
        std::sort(edges.begin(), edges.end());
        edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
        for (auto [u, v] : edges)
            require(u >= 0 && v < vertex_count, "nerve: edge endpoint out of range");
    }
    std::vector<std::vector<int>> adjacency() const {
        std::vector<std::vector<int>> adj(vertex_count);
        for (auto [u, v] : edges) {
            adj[u].push_back(v);
            adj[v].push_back(u);
        }
        return adj;
    }
    int degree(int v) const {
        int d = 0;
        for (auto [a, b] : edges)
            if (a == v || b == v) ++d;
        return d;
    }
};

/// Edge iff the sample-level intersection is nonempty; points covered three
/// times are rejected (the construction requires only double intersections).
inline NerveGraph nerve(const Cover& cover) {
    NerveGraph g;
    g.vertex_count = int(cover.size());
    std::vector<int> hits(cover.master ? cover.master->size() : 0, 0);
    for (const auto& el : cover.elements)
        for (std::size_t i : el) {
            require(i < hits.size(), "nerve: element index out of range");
            ++hits[i];
        }
    for (int c : hits)
        require(c <= 2, "nerve: triple intersection detected");
    for (std::size_t a = 0; a < cover.size(); ++a)
        for (std::size_t b = a + 1; b < cover.size(); ++b) {
            const auto& ea = cover.elements[a];
            const auto& eb = cover.elements[b];
            bool meet = false;
            std::size_t i = 0, j = 0;
            while (i < ea.size() && j < eb.size()) {
                if (ea[i] == eb[j]) {
                    meet = true;
                    break;
                }
                (ea[i] < eb[j]) ? ++i : ++j;
            }
            if (meet) g.add_edge(int(a), int(b));
        }
    g.normalize();
    return g;
}

// ----------------------------------------------------------------------------
// Cycle space over GF(2)
// ----------------------------------------------------------------------------

struct CycleVector {
    std::vector<char> bits;  // one per edge index

    int weight() const {
        int w = 0;
        for (char b : bits) w += b != 0;
        return w;
    }
    bool odd() const { return weight() % 2 == 1; }
};

/// Fundamental cycles of a BFS spanning forest. Each non-tree edge appears in
/// exactly one basis vector, which makes that edge private to its vector.
struct CycleBasis {
    std::vector<CycleVector> vectors;
    std::vector<std::size_t> private_edge;  // the defining non-tree edge per vector
};

inline CycleBasis cycle_basis(const NerveGraph& g) {
    CycleBasis out;
    int n = g.vertex_count;
    std::vector<std::vector<std::pair<int, std::size_t>>> adj(n);  // (to, edge idx)
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
        auto [u, v] = g.edges[e];
        adj[u].push_back({v, e});
        adj[v].push_back({u, e});
    }
    std::vector<int> parent(n, -1), parent_edge(n, -1), depth(n, -1);
    std::vector<char> tree_edge(g.edges.size(), 0);
    for (int root = 0; root < n; ++root) {
        if (depth[root] >= 0) continue;
        depth[root] = 0;
        std::vector<int> queue{root};
        for (std::size_t qi = 0; qi < queue.size(); ++qi) {
            int u = queue[qi];
            for (auto [v, e] : adj[u])
                if (depth[v] < 0) {
                    depth[v] = depth[u] + 1;
                    parent[v] = u;
                    parent_edge[v] = int(e);
                    tree_edge[e] = 1;
                    queue.push_back(v);
                }
        }
    }
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
        if (tree_edge[e]) continue;
        auto [u, v] = g.edges[e];
        CycleVector c;
        c.bits.assign(g.edges.size(), 0);
        c.bits[e] = 1;
        int a = u, b = v;
        while (a != b) {
            if (depth[a] < depth[b]) std::swap(a, b);
            c.bits[parent_edge[a]] ^= 1;
            a = parent[a];
        }
        out.vectors.push_back(std::move(c));
        out.private_edge.push_back(e);
    }
    return out;
}

/// Boundary-free check: every vertex has even incidence with the support.
inline bool cycle_vector_closed(const NerveGraph& g, const CycleVector& c) {
    std::vector<int> deg(g.vertex_count, 0);
    for (std::size_t e = 0; e < g.edges.size(); ++e)
        if (c.bits[e]) {
            ++deg[g.edges[e].first];
            ++deg[g.edges[e].second];
        }
    for (int d : deg)
        if (d % 2) return false;
    return true;
}

/// GF(2) rank by Gaussian elimination (the independence oracle).
inline int gf2_rank(std::vector<CycleVector> rows) {
    int rank = 0;
    std::size_t cols = rows.empty() ? 0 : rows[0].bits.size();
    std::size_t lead = 0;
    for (std::size_t r = 0; r < rows.size() && lead < cols; ++lead) {
        std::size_t piv = r;
        while (piv < rows.size() && !rows[piv].bits[lead]) ++piv;
        if (piv == rows.size()) continue;
        std::swap(rows[r], rows[piv]);
        for (std::size_t k = 0; k < rows.size(); ++k)
            if (k != r && rows[k].bits[lead])
                for (std::size_t j = 0; j < cols; ++j) rows[k].bits[j] ^= rows[r].bits[j];
        ++r;
        ++rank;
    }
    return rank;
}

// ----------------------------------------------------------------------------
// Two-coloring and bipartization
// ----------------------------------------------------------------------------

struct TwoColoring {
    bool ok = false;
    std::vector<int> colors;       // 0 / 1 per vertex
    std::vector<int> odd_circuit;  // vertex list of an odd witness when !ok
};

inline TwoColoring two_color(const NerveGraph& g) {
    TwoColoring out;
    out.colors.assign(g.vertex_count, -1);
    auto adj = g.adjacency();
    std::vector<int> parent(g.vertex_count, -1);
    for (int root = 0; root < g.vertex_count; ++root) {
        if (out.colors[root] >= 0) continue;
        out.colors[root] = 0;
        std::vector<int> queue{root};
        for (std::size_t qi = 0; qi < queue.size(); ++qi) {
            int u = queue[qi];
            for (int v : adj[u]) {
                if (out.colors[v] < 0) {
                    out.colors[v] = 1 - out.colors[u];
                    parent[v] = u;
                    queue.push_back(v);
                } else if (out.colors[v] == out.colors[u]) {
                    // Odd circuit: BFS-tree paths to the lowest common ancestor.
                    std::vector<int> pu{u}, pv{v};
                    std::set<int> seen(pu.begin(), pu.end());
                    int a = u;
                    while (parent[a] >= 0) {
                        a = parent[a];
                        pu.push_back(a);
                        seen.insert(a);
                    }
                    int b = v;
                    while (!seen.count(b)) {
                        pv.push_back(parent[b]);
                        b = parent[b];
                    }
                    // pv.back() is the meeting vertex; trim pu to it.
                    std::vector<int> circuit(pv.begin(), pv.end());
                    std::vector<int> up;
                    for (int x : pu) {
                        if (x == circuit.back()) break;
                        up.push_back(x);
                    }
                    for (auto it = up.rbegin(); it != up.rend(); ++it) circuit.push_back(*it);
                    out.odd_circuit = circuit;
                    out.ok = false;
                    return out;
                }
            }
        }
    }
    out.ok = true;
    return out;
}

struct Bipartization {
    NerveGraph graph;
    std::vector<std::pair<int, int>> split_edges;  // original (u, v) pairs split
    std::vector<int> fresh_vertices;               // inserted vertex ids
};

/// Split the private edge of every odd fundamental-cycle vector. Weight parity
/// is linear over GF(2), so an all-even basis makes every circuit even.
inline Bipartization bipartize_by_splitting(const NerveGraph& g) {
    Bipartization out;
    out.graph = g;
    auto basis = cycle_basis(g);
    std::vector<std::size_t> to_split;
    for (std::size_t i = 0; i < basis.vectors.size(); ++i) {
        if (!basis.vectors[i].odd()) continue;
        // The defining non-tree edge is private by construction; scan anyway
        // and keep the lowest-id edge unique to this vector.
        std::size_t chosen = basis.private_edge[i];
        for (std::size_t e = 0; e < basis.vectors[i].bits.size(); ++e) {
            if (!basis.vectors[i].bits[e]) continue;
            bool unique = true;
            for (std::size_t k = 0; k < basis.vectors.size() && unique; ++k)
                if (k != i && basis.vectors[k].bits[e]) unique = false;
            if (unique) {
                chosen = e;
                break;
            }
        }
        to_split.push_back(chosen);
    }
    std::sort(to_split.begin(), to_split.end());
    // Split from highest edge index down so stored indices stay valid.
    for (auto it = to_split.rbegin(); it != to_split.rend(); ++it) {
        auto [u, v] = out.graph.edges[*it];
        int fresh = out.graph.vertex_count++;
        out.graph.edges.erase(out.graph.edges.begin() + long(*it));
        out.graph.add_edge(u, fresh);
        out.graph.add_edge(fresh, v);
        out.split_edges.push_back({u, v});
        out.fresh_vertices.push_back(fresh);
        if (!out.graph.labels.empty()) out.graph.labels.push_back("split");
    }
    out.graph.normalize();
    return out;
}

/// Suppress degree-2 vertices from the list (inverse of splitting, for tests).
inline NerveGraph suppress_vertices(const NerveGraph& g, const std::vector<int>& vertices) {
    NerveGraph out = g;
    std::set<int> kill(vertices.begin(), vertices.end());
    for (int v : vertices) {
        std::vector<int> nb;
        std::vector<std::pair<int, int>> kept;
        for (auto [a, b] : out.edges) {
            if (a == v) nb.push_back(b);
            else if (b == v) nb.push_back(a);
            else kept.push_back({a, b});
        }
        require(nb.size() == 2, "suppress: vertex is not degree 2");
        out.edges = kept;
        out.add_edge(nb[0], nb[1]);
    }
    // Renumber: suppressed ids must be the trailing ones for a clean inverse.
    for (int v : vertices)
        require(v >= out.vertex_count - int(vertices.size()), "suppress: non-trailing vertex id");
    out.vertex_count -= int(vertices.size());
    out.normalize();
    return out;
}

// ----------------------------------------------------------------------------
// Cover refinement realizing an edge split geometrically
// ----------------------------------------------------------------------------

struct CoverRefineOptions {
    double u_radius_cells = 6.0;   // U = samples within this many h of the overlap
    double trim_radius_cells = 3.0;  // V', W' drop samples within this many h
};

/// Replace elements V, W by V', U, W' with U covering the old overlap and
/// V' cap W' empty; the nerve of the result is the edge-split nerve.
inline Cover refine_cover_split(const Cover& cover, int vi, int wi,
                                const CoverRefineOptions& opt = {}) {
    require(vi != wi && vi >= 0 && wi >= 0 && std::size_t(std::max(vi, wi)) < cover.size(),
            "refine_cover_split: bad element indices");
    const auto& master = *cover.master;
    const auto& V = cover.elements[std::size_t(vi)];
    const auto& W = cover.elements[std::size_t(wi)];
    std::vector<std::size_t> overlap;
    std::set_intersection(V.begin(), V.end(), W.begin(), W.end(), std::back_inserter(overlap));
    require(!overlap.empty(), "refine_cover_split: V and W are disjoint");

    std::vector<Sample> ov_samples;
    for (std::size_t i : overlap) ov_samples.push_back(master.samples[i]);
    SpatialHash ov_hash(ov_samples, 2.0 * master.h);

    double ru = opt.u_radius_cells * master.h;
    double rt = opt.trim_radius_cells * master.h;
    std::vector<std::size_t> u_el, v_el, w_el;
    auto near = [&](std::size_t i, double r) { return ov_hash.nearest_distance(master.pos(i)) <= r; };
    for (std::size_t i : V) {
        if (near(i, ru)) u_el.push_back(i);
        if (!near(i, rt)) v_el.push_back(i);
    }
    for (std::size_t i : W) {
        if (near(i, ru) && !std::binary_search(u_el.begin(), u_el.end(), i)) u_el.push_back(i);
        if (!near(i, rt)) w_el.push_back(i);
    }
    std::sort(u_el.begin(), u_el.end());
    require(!v_el.empty() && !w_el.empty(),
            "refine_cover_split: cannot separate V' and W' at this resolution");

    Cover out;
    out.master = cover.master;
    for (std::size_t e = 0; e < cover.size(); ++e) {
        if (int(e) == vi) out.elements.push_back(v_el);
        else if (int(e) == wi) out.elements.push_back(w_el);
        else out.elements.push_back(cover.elements[e]);
    }
    out.elements.push_back(u_el);  // fresh vertex comes last
    return out;
}

// ----------------------------------------------------------------------------
// Edge-list text format: one "u v" pair per line.
// ----------------------------------------------------------------------------

inline NerveGraph parse_edge_list(std::istream& in) {
    NerveGraph g;
    std::string line;
    int maxv = -1;
    std::vector<std::pair<int, int>> edges;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        long u, v;
        if (!(ls >> u >> v)) {
            if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
            throw std::invalid_argument("edge list: malformed line: " + line);
        }
        require(u >= 0 && v >= 0, "edge list: negative vertex id");
        edges.push_back({int(u), int(v)});
        maxv = std::max(maxv, int(std::max(u, v)));
    }
    g.vertex_count = maxv + 1;
    for (auto [u, v] : edges) g.add_edge(u, v);
    g.normalize();
    return g;
}

inline std::string format_edge_list(const NerveGraph& g) {
    std::ostringstream out;
    for (auto [u, v] : g.edges) out << u << " " << v << "\n";
    return out.str();
}

}  // namespace holopatch

#endif
