#include "randnn/structures.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace randnn;
using namespace randnn::structures;

namespace {
const Dist kUnit = Dist::uniform(-1.0, 1.0);

deepesn::DeepReservoir tiny_stack(int depth, int units, int label_dim, double rho,
                                  std::uint32_t seed, double inter = 0.7) {
    std::vector<int> sizes(depth, units);
    std::vector<double> targets(depth, rho);
    return deepesn::init_deep(sizes, targets, inter, label_dim, kUnit, seed);
}

TreeData path_tree(const Matrix& labels) {
    // node i's child is node i-1: leaf 0, root last
    TreeData tree;
    tree.labels = labels;
    tree.children.resize(labels.rows());
    for (Eigen::Index i = 1; i < labels.rows(); ++i) tree.children[i] = {static_cast<int>(i - 1)};
    tree.root = static_cast<int>(labels.rows() - 1);
    return tree;
}
}  // namespace

TEST_CASE("validate_tree rejects malformed structures") {
    TreeData tree;
    tree.labels = Matrix::Ones(3, 1);
    tree.children = {{1}, {2}, {}};
    tree.root = 0;
    CHECK_NOTHROW(validate_tree(tree));

    SUBCASE("cycle") {
        tree.children = {{1}, {2}, {0}};
        CHECK_THROWS(validate_tree(tree));
    }
    SUBCASE("multiple parents") {
        tree.children = {{1, 2}, {2}, {}};
        CHECK_THROWS_WITH_AS(validate_tree(tree), doctest::Contains("multiple parents"),
                             std::invalid_argument);
    }
    SUBCASE("unknown child id") {
        tree.children = {{1}, {5}, {}};
        CHECK_THROWS_WITH_AS(validate_tree(tree), doctest::Contains("unknown child"),
                             std::invalid_argument);
    }
    SUBCASE("disconnected node") {
        tree.children = {{1}, {}, {}};
        CHECK_THROWS_WITH_AS(validate_tree(tree), doctest::Contains("unreachable"),
                             std::invalid_argument);
    }
}

TEST_CASE("tree_embed: a leaf is the empty-child-sum step") {
    auto dr = tiny_stack(2, 5, 3, 0.8, 1);
    TreeData leaf;
    leaf.labels = oracles::random_matrix(1, 3, 2);
    leaf.children = {{}};
    leaf.root = 0;
    StructEmbedding emb = tree_embed(dr, leaf);
    REQUIRE(emb.layer_states.size() == 2);
    Vector expect1 = reservoir::step(dr.layers[0], leaf.labels.row(0).transpose(), Vector::Zero(5));
    CHECK((emb.layer_states[0].row(0).transpose() - expect1).cwiseAbs().maxCoeff() == 0.0);
    Vector expect2 = reservoir::step(dr.layers[1], expect1, Vector::Zero(5));
    CHECK((emb.layer_states[1].row(0).transpose() - expect2).cwiseAbs().maxCoeff() == 0.0);
    CHECK(emb.root == 0);
}

TEST_CASE("tree_embed: hand-evaluated two-node chain") {
    deepesn::DeepReservoir dr;
    reservoir::ReservoirLayer layer;
    layer.W = Matrix::Constant(1, 1, 0.5);
    layer.W_R = Matrix::Constant(1, 1, 0.5);
    layer.bias = Vector::Zero(1);
    dr.layers.push_back(layer);

    TreeData tree;
    tree.labels = Matrix::Ones(2, 1);
    tree.children = {{}, {0}};  // node 1 is the root, node 0 its only child
    tree.root = 1;

    StructEmbedding emb = tree_embed(dr, tree);
    const double child = std::tanh(0.5);
    const double root = std::tanh(0.5 + 0.5 * child);
    CHECK(emb.layer_states[0](0, 0) == doctest::Approx(child).epsilon(1e-15));
    CHECK(emb.layer_states[0](1, 0) == doctest::Approx(root).epsilon(1e-15));
}

TEST_CASE("tree_embed: child order does not matter") {
    auto dr = tiny_stack(1, 6, 2, 0.8, 3);
    TreeData tree;
    tree.labels = oracles::random_matrix(4, 2, 4);
    tree.children = {{1, 2, 3}, {}, {}, {}};
    tree.root = 0;
    StructEmbedding a = tree_embed(dr, tree);

    TreeData permuted = tree;
    permuted.children[0] = {3, 1, 2};
    StructEmbedding b = tree_embed(dr, permuted);
    CHECK((a.layer_states[0] - b.layer_states[0]).cwiseAbs().maxCoeff() <= 1e-14);

    SUBCASE("two children commute exactly") {
        TreeData pair = tree;
        pair.labels = oracles::random_matrix(3, 2, 5);
        pair.children = {{1, 2}, {}, {}};
        pair.root = 0;
        StructEmbedding x = tree_embed(dr, pair);
        std::swap(pair.children[0][0], pair.children[0][1]);
        StructEmbedding y = tree_embed(dr, pair);
        CHECK((x.layer_states[0] - y.layer_states[0]).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("tree_embed on a unary path reproduces deep_run exactly") {
    for (std::uint32_t seed = 0; seed < 4; ++seed) {
        const int T = 6 + static_cast<int>(seed) * 3;
        auto dr = tiny_stack(2, 4, 2, 0.9, 100 + seed);
        Matrix labels = oracles::random_matrix(T, 2, 200 + seed);
        StructEmbedding emb = tree_embed(dr, path_tree(labels));
        auto traces = deepesn::deep_run(dr, labels, 0);
        for (int l = 0; l < 2; ++l) {
            CHECK((emb.layer_states[l] - traces[l].states).cwiseAbs().maxCoeff() == 0.0);
        }
    }
}

TEST_CASE("graph_embed: isolated vertex settles immediately") {
    auto dr = tiny_stack(1, 5, 2, 0.5, 6);
    GraphData g;
    g.features = oracles::random_matrix(1, 2, 7);
    StructEmbedding emb = graph_embed(dr, g);
    CHECK(emb.converged);
    CHECK(emb.iterations[0] <= 2);
    CHECK(emb.residuals[0] == 0.0);
    Vector expect = reservoir::step(dr.layers[0], g.features.row(0).transpose(), Vector::Zero(5));
    CHECK((emb.layer_states[0].row(0).transpose() - expect).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("graph_embed: huge tolerance stops after one sweep") {
    auto dr = tiny_stack(1, 5, 2, 0.5, 8);
    GraphData g;
    g.features = oracles::random_matrix(3, 2, 9);
    g.edges = {{0, 1}, {1, 2}};
    GraphEmbedOptions opts;
    opts.tol = 1e9;
    StructEmbedding emb = graph_embed(dr, g, opts);
    CHECK(emb.iterations[0] == 1);
    for (int v = 0; v < 3; ++v) {
        Vector expect = reservoir::step(dr.layers[0], g.features.row(v).transpose(), Vector::Zero(5));
        CHECK((emb.layer_states[0].row(v).transpose() - expect).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("graph_embed: matches a brute-force fixed point at 10x tighter tolerance") {
    auto dr = tiny_stack(1, 4, 2, 0.2, 10);  // small norm keeps the map contractive
    GraphData g;
    g.features = oracles::random_matrix(2, 2, 11);
    g.edges = {{0, 1}};
    g.directed = false;

    GraphEmbedOptions opts;
    opts.tol = 1e-8;
    StructEmbedding emb = graph_embed(dr, g, opts);
    REQUIRE(emb.converged);
    CHECK(!emb.contraction_warning);

    // independent Jacobi loop at 10x tighter tolerance
    const auto& layer = dr.layers[0];
    Matrix states = Matrix::Zero(2, 4);
    for (int it = 0; it < 10000; ++it) {
        Matrix next(2, 4);
        for (int v = 0; v < 2; ++v) {
            Vector nb = states.row(1 - v).transpose();
            Vector z = layer.W.transpose() * g.features.row(v).transpose() +
                       layer.W_R.transpose() * nb;
            next.row(v) = z.array().tanh().transpose();
        }
        const double resid = (next - states).rowwise().norm().maxCoeff();
        states = next;
        if (resid <= opts.tol / 10.0) break;
    }
    CHECK((emb.layer_states[0] - states).cwiseAbs().maxCoeff() <= 10.0 * opts.tol);
}

TEST_CASE("graph_embed: DAG reaches residual zero within longest-path+1 sweeps") {
    std::mt19937 rng(12);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 5; ++trial) {
        const int n = 10;
        GraphData g;
        g.features = oracles::random_matrix(n, 2, 300 + trial);
        g.directed = true;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                if (u(rng) < 0.25) g.edges.emplace_back(i, j);

        // longest path in nodes via DP over the topological order 0..n-1
        std::vector<int> depth(n, 1);
        for (const auto& [a, b] : g.edges) depth[b] = std::max(depth[b], depth[a] + 1);
        const int longest = *std::max_element(depth.begin(), depth.end());

        auto dr = tiny_stack(1, 4, 2, 0.9, 400 + trial);
        GraphEmbedOptions opts;
        opts.tol = 0.0;
        opts.max_iter = longest + 1;
        StructEmbedding emb = graph_embed(dr, g, opts);
        CHECK(emb.converged);
        CHECK(emb.residuals[0] == 0.0);
        CHECK(emb.iterations[0] <= longest + 1);
    }
}

TEST_CASE("graph_embed: vertex relabeling only permutes the embedding") {
    auto dr = tiny_stack(2, 4, 2, 0.2, 13, 0.3);
    GraphData g;
    g.features = oracles::random_matrix(5, 2, 14);
    g.edges = {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 0}, {1, 3}};

    std::vector<int> perm = {3, 0, 4, 1, 2};
    GraphData h;
    h.features.resize(5, 2);
    for (int v = 0; v < 5; ++v) h.features.row(perm[v]) = g.features.row(v);
    for (const auto& [a, b] : g.edges) h.edges.emplace_back(perm[a], perm[b]);

    GraphEmbedOptions opts;
    opts.tol = 1e-13;
    opts.max_iter = 500;
    StructEmbedding ea = graph_embed(dr, g, opts);
    StructEmbedding eb = graph_embed(dr, h, opts);
    REQUIRE(ea.converged);
    for (std::size_t l = 0; l < 2; ++l) {
        for (int v = 0; v < 5; ++v) {
            CHECK((ea.layer_states[l].row(v) - eb.layer_states[l].row(perm[v])).cwiseAbs().maxCoeff() <=
                  1e-11);
        }
    }
}

TEST_CASE("graph_embed: unique fixed point under the contraction precondition") {
    auto dr = tiny_stack(1, 4, 2, 0.2, 15);
    GraphData g;
    g.features = oracles::random_matrix(4, 2, 16);
    g.edges = {{0, 1}, {1, 2}, {2, 0}, {2, 3}};
    g.directed = false;

    GraphEmbedOptions zero_init;
    zero_init.tol = 1e-10;
    zero_init.max_iter = 2000;
    StructEmbedding a = graph_embed(dr, g, zero_init);
    REQUIRE(a.converged);
    CHECK(!a.contraction_warning);

    GraphEmbedOptions random_init = zero_init;
    random_init.initial_states = {0.9 * oracles::random_matrix(4, 4, 17)};
    StructEmbedding b = graph_embed(dr, g, random_init);
    REQUIRE(b.converged);
    CHECK((a.layer_states[0] - b.layer_states[0]).cwiseAbs().maxCoeff() <= 10.0 * zero_init.tol);
}

TEST_CASE("graph_embed: hitting max_iter leaves a warning and the last iterate") {
    auto dr = tiny_stack(1, 5, 2, 0.4, 30);
    GraphData g;
    g.features = oracles::random_matrix(4, 2, 31);
    g.edges = {{0, 1}, {1, 2}, {2, 3}, {3, 0}};
    g.directed = false;
    GraphEmbedOptions opts;
    opts.tol = 1e-14;
    opts.max_iter = 1;
    StructEmbedding emb = graph_embed(dr, g, opts);
    CHECK(!emb.converged);
    CHECK(emb.iterations[0] == 1);
    CHECK(emb.residuals[0] > opts.tol);
    CHECK(emb.layer_states[0].rows() == 4);
    CHECK(emb.layer_states[0].allFinite());
}

TEST_CASE("graph_embed: contraction warning outside the safe regime") {
    auto dr = tiny_stack(1, 6, 2, 0.9, 18);  // rho 0.9 with degree 2: no contraction guarantee
    GraphData g;
    g.features = oracles::random_matrix(3, 2, 19);
    g.edges = {{0, 1}, {1, 2}, {2, 0}};
    g.directed = false;
    StructEmbedding emb = graph_embed(dr, g);
    CHECK(emb.contraction_warning);
}

TEST_CASE("pool") {
    auto dr = tiny_stack(2, 5, 2, 0.8, 20);
    TreeData tree;
    tree.labels = oracles::random_matrix(1, 2, 21);
    tree.children = {{}};
    tree.root = 0;
    StructEmbedding emb = tree_embed(dr, tree);

    SUBCASE("single node: mean equals sum equals the node state") {
        Vector mean = pool(emb, PoolMode::Mean, deepesn::ReadoutMode::LastLayer);
        Vector sum = pool(emb, PoolMode::Sum, deepesn::ReadoutMode::LastLayer);
        Vector root = pool(emb, PoolMode::Root, deepesn::ReadoutMode::LastLayer);
        CHECK((mean - sum).cwiseAbs().maxCoeff() == 0.0);
        CHECK((mean - root).cwiseAbs().maxCoeff() == 0.0);
        CHECK(mean.size() == 5);
    }
    SUBCASE("all-layers pooling concatenates layer blocks") {
        Vector all = pool(emb, PoolMode::Mean, deepesn::ReadoutMode::AllLayers);
        CHECK(all.size() == 10);
        CHECK((all.head(5).transpose() - emb.layer_states[0].row(0)).cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("identical nodes: mean equals either, sum equals count times mean") {
        TreeData twin;
        twin.labels = Matrix::Ones(2, 2) * 0.3;
        twin.children = {{1}, {}};
        twin.root = 0;
        // give both nodes the same state by silencing the recurrent path
        auto ff = tiny_stack(1, 5, 2, 0.8, 22);
        ff.layers[0].W_R.setZero();
        StructEmbedding e2 = tree_embed(ff, twin);
        Vector mean = pool(e2, PoolMode::Mean, deepesn::ReadoutMode::LastLayer);
        Vector sum = pool(e2, PoolMode::Sum, deepesn::ReadoutMode::LastLayer);
        CHECK((mean.transpose() - e2.layer_states[0].row(0)).cwiseAbs().maxCoeff() <= 1e-15);
        CHECK((sum - 2.0 * mean).cwiseAbs().maxCoeff() <= 1e-15);
    }
    SUBCASE("root pooling requires a tree") {
        GraphData g;
        g.features = oracles::random_matrix(2, 2, 23);
        g.edges = {{0, 1}};
        StructEmbedding ge = graph_embed(dr, g);
        CHECK_THROWS_AS(pool(ge, PoolMode::Root, deepesn::ReadoutMode::LastLayer),
                        std::invalid_argument);
    }
}
