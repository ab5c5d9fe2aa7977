#pragma once

#include "randnn/deepesn.hpp"

#include <utility>
#include <vector>

namespace randnn::structures {

/// Rooted tree with ordered children and one label vector per node.
struct TreeData {
    Matrix labels;  // nodes x label_dim
    std::vector<std::vector<int>> children;
    int root = -1;

    int num_nodes() const { return static_cast<int>(labels.rows()); }
    int max_arity() const;
};

/// Throws on bad child ids, multiple parents, cycles, or a missing root.
void validate_tree(const TreeData& tree);

struct GraphData {
    Matrix features;  // vertices x feature_dim
    std::vector<std::pair<int, int>> edges;
    bool directed = false;

    int num_vertices() const { return static_cast<int>(features.rows()); }
    /// In-neighbor lists for directed graphs, adjacency for undirected.
    std::vector<std::vector<int>> neighbors() const;
    int max_degree() const;
};

void validate_graph(const GraphData& graph);

/// Per-layer, per-node states plus fixed-point iteration metadata (graphs).
struct StructEmbedding {
    std::vector<Matrix> layer_states;  // layer l: nodes x units_l
    int root = -1;                     // >= 0 for trees
    bool converged = true;
    std::vector<int> iterations;       // per layer, graphs only
    std::vector<double> residuals;     // per layer final residual
    bool contraction_warning = false;  // ||W_R||_2 * k_max >= 1 on some layer
};

/// Bottom-up embedding: h^l(n) = tanh(W^lT x^l(n) + W_R^lT sum_i h^l(ch_i(n))),
/// with the node label as input at layer 1 and the previous layer's state above.
StructEmbedding tree_embed(const deepesn::DeepReservoir& dr, const TreeData& tree);

struct GraphEmbedOptions {
    double tol = 1e-9;
    int max_iter = 200;
    /// Divide the neighbor sum by |N(v)|; relaxes the contraction requirement.
    bool degree_normalization = false;
    /// Per-layer initial states (nodes x units_l); zeros when empty.
    std::vector<Matrix> initial_states;
};

/// Jacobi fixed-point iteration of
/// h^l(v) = tanh(W^lT x^l(v) + sum_{v' in N(v)} W_R^lT h^l(v')).
StructEmbedding graph_embed(const deepesn::DeepReservoir& dr, const GraphData& graph,
                            const GraphEmbedOptions& opts = {});

enum class PoolMode { Root, Mean, Sum };

PoolMode parse_pool_mode(const std::string& text);
std::string to_string(PoolMode mode);

/// Fixed-width structure feature: root state (trees only) or mean/sum over
/// nodes, with layers selected as in deepesn::collect_features.
Vector pool(const StructEmbedding& emb, PoolMode mode, deepesn::ReadoutMode select);

}  // namespace randnn::structures
