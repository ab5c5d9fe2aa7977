#include "randnn/structures.hpp"

#include "randnn/linalg.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace randnn::structures {

int TreeData::max_arity() const {
    std::size_t k = 0;
    for (const auto& ch : children) k = std::max(k, ch.size());
    return static_cast<int>(k);
}

void validate_tree(const TreeData& tree) {
    const int n = tree.num_nodes();
    if (n == 0) throw std::invalid_argument("tree: no nodes");
    if (static_cast<int>(tree.children.size()) != n) {
        throw std::invalid_argument("tree: children list size does not match node count");
    }
    if (tree.root < 0 || tree.root >= n) throw std::invalid_argument("tree: bad root index");
    if (!tree.labels.allFinite()) throw std::invalid_argument("tree: non-finite labels");

    std::vector<int> parents(n, -1);
    for (int p = 0; p < n; ++p) {
        for (int c : tree.children[p]) {
            if (c < 0 || c >= n) {
                throw std::invalid_argument("tree: node " + std::to_string(p) +
                                            " references unknown child " + std::to_string(c));
            }
            if (parents[c] != -1) {
                throw std::invalid_argument("tree: node " + std::to_string(c) + " has multiple parents");
            }
            parents[c] = p;
        }
    }
    if (parents[tree.root] != -1) throw std::invalid_argument("tree: root has a parent");
    for (int v = 0; v < n; ++v) {
        if (v != tree.root && parents[v] == -1) {
            throw std::invalid_argument("tree: node " + std::to_string(v) +
                                        " is unreachable (not a single-rooted tree)");
        }
    }
    // parent walk terminates for every node iff there is no cycle
    for (int v = 0; v < n; ++v) {
        int hops = 0;
        for (int cur = v; cur != tree.root; cur = parents[cur]) {
            if (++hops > n) throw std::invalid_argument("tree: cycle detected");
        }
    }
}

std::vector<std::vector<int>> GraphData::neighbors() const {
    std::vector<std::vector<int>> nb(num_vertices());
    for (const auto& [u, v] : edges) {
        nb[v].push_back(u);
        if (!directed) nb[u].push_back(v);
    }
    return nb;
}

int GraphData::max_degree() const {
    const auto nb = neighbors();
    std::size_t k = 0;
    for (const auto& list : nb) k = std::max(k, list.size());
    return static_cast<int>(k);
}

void validate_graph(const GraphData& graph) {
    const int n = graph.num_vertices();
    if (n == 0) throw std::invalid_argument("graph: no vertices");
    if (!graph.features.allFinite()) throw std::invalid_argument("graph: non-finite features");
    for (const auto& [u, v] : graph.edges) {
        if (u < 0 || u >= n) throw std::invalid_argument("graph: edge references unknown vertex " + std::to_string(u));
        if (v < 0 || v >= n) throw std::invalid_argument("graph: edge references unknown vertex " + std::to_string(v));
    }
}

namespace {

// children-first ordering via iterative post-order walk from the root
std::vector<int> postorder(const TreeData& tree) {
    std::vector<int> order;
    order.reserve(tree.num_nodes());
    std::vector<std::pair<int, std::size_t>> stack{{tree.root, 0}};
    while (!stack.empty()) {
        auto& [node, next_child] = stack.back();
        if (next_child < tree.children[node].size()) {
            int child = tree.children[node][next_child++];
            stack.emplace_back(child, 0);
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }
    return order;
}

void check_layer_dims(const deepesn::DeepReservoir& dr, Eigen::Index label_dim, const char* what) {
    if (dr.layers.empty()) throw std::invalid_argument(std::string(what) + ": empty reservoir");
    if (dr.layers[0].input_dim() != label_dim) {
        throw std::invalid_argument(std::string(what) + ": layer 1 expects input dim " +
                                    std::to_string(dr.layers[0].input_dim()) + ", labels have " +
                                    std::to_string(label_dim));
    }
    for (std::size_t l = 1; l < dr.layers.size(); ++l) {
        if (dr.layers[l].input_dim() != dr.layers[l - 1].units()) {
            throw std::invalid_argument(std::string(what) + ": layer dimension chain broken at layer " +
                                        std::to_string(l + 1));
        }
    }
}

}  // namespace

StructEmbedding tree_embed(const deepesn::DeepReservoir& dr, const TreeData& tree) {
    validate_tree(tree);
    check_layer_dims(dr, tree.labels.cols(), "tree_embed");

    const auto order = postorder(tree);
    StructEmbedding emb;
    emb.root = tree.root;
    emb.layer_states.reserve(dr.layers.size());

    const Matrix* input = &tree.labels;
    for (std::size_t l = 0; l < dr.layers.size(); ++l) {
        const auto& layer = dr.layers[l];
        Matrix states = Matrix::Zero(tree.num_nodes(), layer.units());
        for (int node : order) {
            Vector child_sum = Vector::Zero(layer.units());
            for (int c : tree.children[node]) child_sum += states.row(c).transpose();
            states.row(node) =
                reservoir::step(layer, input->row(node).transpose(), child_sum).transpose();
        }
        emb.layer_states.push_back(std::move(states));
        input = &emb.layer_states.back();
    }
    return emb;
}

StructEmbedding graph_embed(const deepesn::DeepReservoir& dr, const GraphData& graph,
                            const GraphEmbedOptions& opts) {
    validate_graph(graph);
    check_layer_dims(dr, graph.features.cols(), "graph_embed");
    if (!opts.initial_states.empty() && opts.initial_states.size() != dr.layers.size()) {
        throw std::invalid_argument("graph_embed: initial_states must cover every layer");
    }

    const auto nb = graph.neighbors();
    const int n = graph.num_vertices();
    const int k_max = graph.max_degree();

    StructEmbedding emb;
    emb.converged = true;
    emb.layer_states.reserve(dr.layers.size());

    const Matrix* input = &graph.features;
    for (std::size_t l = 0; l < dr.layers.size(); ++l) {
        const auto& layer = dr.layers[l];
        const double lipschitz = opts.degree_normalization
                                     ? linalg::spectral_norm(layer.W_R)
                                     : linalg::spectral_norm(layer.W_R) * std::max(k_max, 1);
        if (lipschitz >= 1.0) emb.contraction_warning = true;

        Matrix states = opts.initial_states.empty() ? Matrix(Matrix::Zero(n, layer.units()))
                                                    : opts.initial_states[l];
        if (states.rows() != n || states.cols() != layer.units()) {
            throw std::invalid_argument("graph_embed: initial states have wrong shape at layer " +
                                        std::to_string(l + 1));
        }

        double residual = 0.0;
        int it = 0;
        bool layer_converged = false;
        for (; it < opts.max_iter; ++it) {
            Matrix next(n, layer.units());
            for (int v = 0; v < n; ++v) {
                Vector nb_sum = Vector::Zero(layer.units());
                for (int u : nb[v]) nb_sum += states.row(u).transpose();
                if (opts.degree_normalization && !nb[v].empty()) {
                    nb_sum /= static_cast<double>(nb[v].size());
                }
                next.row(v) = reservoir::step(layer, input->row(v).transpose(), nb_sum).transpose();
            }
            residual = 0.0;
            for (int v = 0; v < n; ++v) {
                residual = std::max(residual, (next.row(v) - states.row(v)).norm());
            }
            states = std::move(next);
            if (residual <= opts.tol) {
                ++it;
                layer_converged = true;
                break;
            }
        }
        emb.iterations.push_back(it);
        emb.residuals.push_back(residual);
        if (!layer_converged) emb.converged = false;

        emb.layer_states.push_back(std::move(states));
        input = &emb.layer_states.back();
    }
    return emb;
}

PoolMode parse_pool_mode(const std::string& text) {
    if (text == "root") return PoolMode::Root;
    if (text == "mean") return PoolMode::Mean;
    if (text == "sum") return PoolMode::Sum;
    throw std::invalid_argument("unknown pool mode '" + text + "'");
}

std::string to_string(PoolMode mode) {
    switch (mode) {
        case PoolMode::Root: return "root";
        case PoolMode::Mean: return "mean";
        case PoolMode::Sum: return "sum";
    }
    return "mean";
}

Vector pool(const StructEmbedding& emb, PoolMode mode, deepesn::ReadoutMode select) {
    if (emb.layer_states.empty()) throw std::invalid_argument("pool: empty embedding");
    if (mode == PoolMode::Root && emb.root < 0) {
        throw std::invalid_argument("pool: root mode requires a tree embedding");
    }
    const std::size_t first =
        select == deepesn::ReadoutMode::AllLayers ? 0 : emb.layer_states.size() - 1;
    Eigen::Index width = 0;
    for (std::size_t l = first; l < emb.layer_states.size(); ++l) width += emb.layer_states[l].cols();

    Vector out(width);
    Eigen::Index at = 0;
    for (std::size_t l = first; l < emb.layer_states.size(); ++l) {
        const Matrix& s = emb.layer_states[l];
        Vector part;
        switch (mode) {
            case PoolMode::Root: part = s.row(emb.root).transpose(); break;
            case PoolMode::Mean: part = s.colwise().mean().transpose(); break;
            case PoolMode::Sum: part = s.colwise().sum().transpose(); break;
        }
        out.segment(at, part.size()) = part;
        at += part.size();
    }
    return out;
}

}  // namespace randnn::structures
