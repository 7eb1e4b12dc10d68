#include <catch2/catch_amalgamated.hpp>

#include "hetfuse/info_gaussian.hpp"
#include "support/test_util.hpp"

using namespace hetfuse;
using testutil::rel_err;

namespace {

Variable tv(int entity, int dim = 1) { return Variable::target(entity, dim); }

InfoGaussian random_info(std::mt19937& rng, const std::vector<Variable>& vars) {
    VariableSet vs(vars);
    const int n = vs.total_dim();
    return InfoGaussian(vs, testutil::random_vector(rng, n), testutil::random_spd(rng, n));
}

/// Moment-space route: invert, slice the kept block, convert back.
InfoGaussian marginal_via_moments(const InfoGaussian& g, const VariableSet& keep) {
    const Eigen::MatrixXd sigma = g.lambda.inverse();
    const Eigen::VectorXd mu = sigma * g.zeta;
    const auto idx = g.vars.indices_of(keep);
    Eigen::MatrixXd s(idx.size(), idx.size());
    Eigen::VectorXd m(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) {
        m(i) = mu(idx[i]);
        for (std::size_t j = 0; j < idx.size(); ++j) s(i, j) = sigma(idx[i], idx[j]);
    }
    const Eigen::MatrixXd lam = s.inverse();
    return InfoGaussian(keep, lam * m, lam);
}

} // namespace

TEST_CASE("marginalize leaves block-diagonal factors untouched") {
    std::mt19937 rng(11);
    VariableSet vx({tv(0, 2)}), vs({tv(1, 2)});
    const Eigen::MatrixXd a = testutil::random_spd(rng, 2);
    const Eigen::MatrixXd b = testutil::random_spd(rng, 2);
    Eigen::MatrixXd lam = Eigen::MatrixXd::Zero(4, 4);
    lam.topLeftCorner(2, 2) = a;
    lam.bottomRightCorner(2, 2) = b;
    const Eigen::VectorXd zeta = testutil::random_vector(rng, 4);

    InfoGaussian g(vx.set_union(vs), zeta, lam);
    const InfoGaussian m = marginalize(g, vx);
    REQUIRE(rel_err(m.lambda, a) < 1e-14);
    REQUIRE(rel_err(Eigen::VectorXd(m.zeta), Eigen::VectorXd(zeta.head(2))) < 1e-14);
}

TEST_CASE("marginalize matches the moment-space oracle") {
    std::mt19937 rng(17);
    for (int rep = 0; rep < 30; ++rep) {
        const InfoGaussian g = random_info(rng, {tv(0, 2), tv(1, 2)});
        const VariableSet keep({tv(0, 2)});
        const InfoGaussian got = marginalize(g, keep);
        const InfoGaussian want = marginal_via_moments(g, keep);
        REQUIRE(rel_err(got.lambda, want.lambda) < 1e-9);
        REQUIRE(rel_err(got.zeta, want.zeta) < 1e-9);
    }
}

TEST_CASE("marginalize refuses singular removed blocks and foreign variables") {
    VariableSet both({tv(0), tv(1)});
    InfoGaussian zero = InfoGaussian::zero(both);
    REQUIRE_THROWS_AS(marginalize(zero, VariableSet({tv(0)})), SingularBlock);
    std::mt19937 rng(3);
    const InfoGaussian g = random_info(rng, {tv(0), tv(1)});
    REQUIRE_THROWS_AS(marginalize(g, VariableSet({tv(7)})), UnknownVariable);
}

TEST_CASE("condition_on with zero coupling is independence") {
    std::mt19937 rng(5);
    const Eigen::MatrixXd a = testutil::random_spd(rng, 2);
    const Eigen::MatrixXd b = testutil::random_spd(rng, 3);
    Eigen::MatrixXd lam = Eigen::MatrixXd::Zero(5, 5);
    lam.topLeftCorner(2, 2) = a;
    lam.bottomRightCorner(3, 3) = b;
    InfoGaussian g(VariableSet({tv(0, 2), tv(1, 3)}), testutil::random_vector(rng, 5), lam);

    const ConditionalInfo c = condition_on(g, VariableSet({tv(0, 2)}));
    REQUIRE(c.lambda_sx.norm() == 0.0);
    REQUIRE(rel_err(c.lambda_ss, b) < 1e-14);

    const InfoGaussian joint = recombine(marginalize(g, VariableSet({tv(0, 2)})), c);
    REQUIRE(rel_err(joint.lambda, g.lambda) < 1e-12);
}

TEST_CASE("condition_on / recombine round trip is the identity") {
    std::mt19937 rng(7);
    for (int rep = 0; rep < 30; ++rep) {
        const InfoGaussian g = random_info(rng, {tv(0, 2), tv(1, 1), tv(2, 3)});
        const VariableSet given({tv(0, 2), tv(2, 3)});
        const InfoGaussian back = recombine(marginalize(g, given), condition_on(g, given));
        REQUIRE(back.vars == g.vars);
        REQUIRE(rel_err(back.lambda, g.lambda) < 1e-10);
        REQUIRE(rel_err(back.zeta, g.zeta) < 1e-10);
    }
}

TEST_CASE("recombined joint: upper-left block adds the coupling term to the marginal") {
    std::mt19937 rng(23);
    const InfoGaussian g = random_info(rng, {tv(0, 2), tv(1, 2)});
    const VariableSet x({tv(0, 2)});
    const InfoGaussian marg = marginalize(g, x);
    const ConditionalInfo cond = condition_on(g, x);
    const InfoGaussian joint = recombine(marg, cond);

    const Eigen::MatrixXd expect_xx =
        marg.lambda +
        cond.lambda_sx.transpose() * cond.lambda_ss.inverse() * cond.lambda_sx;
    REQUIRE(rel_err(Eigen::MatrixXd(joint.lambda.topLeftCorner(2, 2)), expect_xx) < 1e-10);
    // recombined joint must reproduce the marginal it was built from
    REQUIRE(rel_err(marginalize(joint, x).lambda, marg.lambda) < 1e-10);
}

TEST_CASE("moment conversion round trip and trivial case") {
    VariableSet v({tv(0, 3)});
    InfoGaussian ident(v, Eigen::VectorXd::Zero(3), Eigen::MatrixXd::Identity(3, 3));
    const MomentGaussian m = to_moments(ident);
    REQUIRE(m.mu.norm() == 0.0);
    REQUIRE(rel_err(m.sigma, Eigen::MatrixXd::Identity(3, 3)) < 1e-14);

    std::mt19937 rng(29);
    for (int rep = 0; rep < 20; ++rep) {
        const InfoGaussian g = random_info(rng, {tv(0, 2), tv(1, 2)});
        const InfoGaussian back = from_moments(to_moments(g));
        REQUIRE(rel_err(back.lambda, g.lambda) < 1e-10);
        REQUIRE(rel_err(back.zeta, g.zeta) < 1e-10);
    }
    REQUIRE_THROWS_AS(to_moments(InfoGaussian::zero(v)), SingularMatrix);
}

TEST_CASE("embed is additive and invertible on its image") {
    std::mt19937 rng(31);
    const InfoGaussian a = random_info(rng, {tv(0, 2)});
    const VariableSet sup({tv(0, 2), tv(1, 2)});

    const InfoGaussian self = embed(a, a.vars);
    REQUIRE(rel_err(self.lambda, a.lambda) < 1e-15);

    const InfoGaussian up = embed(a, sup);
    const auto idx = sup.indices_of(a.vars);
    for (std::size_t i = 0; i < idx.size(); ++i)
        for (std::size_t j = 0; j < idx.size(); ++j)
            REQUIRE(up.lambda(idx[i], idx[j]) == a.lambda(i, j));
    REQUIRE(up.lambda.norm() == a.lambda.norm());

    REQUIRE_THROWS_AS(embed(random_info(rng, {tv(9)}), sup), UnknownVariable);
}

TEST_CASE("information addition of embedded factors equals the Bayes product oracle") {
    std::mt19937 rng(37);
    for (int rep = 0; rep < 20; ++rep) {
        const InfoGaussian a = random_info(rng, {tv(0, 2), tv(1, 2)});
        const InfoGaussian b = random_info(rng, {tv(0, 2), tv(1, 2)});
        const MomentGaussian ma = to_moments(a), mb = to_moments(b);

        // brute-force moment-space product of two Gaussians
        const Eigen::MatrixXd sf = (ma.sigma.inverse() + mb.sigma.inverse()).inverse();
        const Eigen::VectorXd mf = sf * (ma.sigma.inverse() * ma.mu + mb.sigma.inverse() * mb.mu);

        const MomentGaussian got = to_moments(embed(a, a.vars) + embed(b, b.vars));
        REQUIRE(rel_err(got.sigma, sf) < 1e-9);
        REQUIRE(rel_err(got.mu, mf) < 1e-9);
    }
}

TEST_CASE("symmetric eigen utilities") {
    REQUIRE(min_eig_sym(Eigen::MatrixXd::Identity(3, 3)) == Catch::Approx(1.0));
    REQUIRE(rel_err(sym_inv_sqrt(Eigen::MatrixXd::Identity(3, 3)),
                    Eigen::MatrixXd::Identity(3, 3)) < 1e-14);

    Eigen::MatrixXd d = Eigen::Vector2d(4.0, 9.0).asDiagonal();
    REQUIRE(min_eig_sym(d) == Catch::Approx(4.0));
    const Eigen::MatrixXd s = sym_inv_sqrt(d);
    REQUIRE(s(0, 0) == Catch::Approx(0.5));
    REQUIRE(s(1, 1) == Catch::Approx(1.0 / 3.0));

    std::mt19937 rng(41);
    for (int rep = 0; rep < 20; ++rep) {
        const Eigen::MatrixXd m = testutil::random_spd(rng, 5);
        const Eigen::MatrixXd r = sym_inv_sqrt(m);
        REQUIRE((r * m * r - Eigen::MatrixXd::Identity(5, 5)).norm() < 1e-9);
    }
    Eigen::MatrixXd indef = Eigen::Vector2d(1.0, -1.0).asDiagonal();
    REQUIRE_THROWS_AS(sym_inv_sqrt(indef), NotPositiveDefinite);
}

TEST_CASE("marginalization commutes with moment extraction") {
    std::mt19937 rng(43);
    for (int rep = 0; rep < 40; ++rep) {
        std::uniform_int_distribution<int> dim(1, 4);
        const InfoGaussian g =
            random_info(rng, {tv(0, dim(rng)), tv(1, dim(rng)), tv(2, dim(rng))});
        const VariableSet keep({tv(0, g.vars.vars()[0].dim), tv(2, g.vars.vars()[2].dim)});

        const MomentGaussian via_marg = to_moments(marginalize(g, keep));
        const MomentGaussian full = to_moments(g);
        const auto idx = g.vars.indices_of(keep);
        Eigen::MatrixXd sub(idx.size(), idx.size());
        Eigen::VectorXd mu(idx.size());
        for (std::size_t i = 0; i < idx.size(); ++i) {
            mu(i) = full.mu(idx[i]);
            for (std::size_t j = 0; j < idx.size(); ++j) sub(i, j) = full.sigma(idx[i], idx[j]);
        }
        REQUIRE(rel_err(via_marg.sigma, sub) < 1e-9);
        REQUIRE(rel_err(via_marg.mu, mu) < 1e-9);
    }
}

TEST_CASE("operations preserve symmetry") {
    std::mt19937 rng(47);
    const InfoGaussian g = random_info(rng, {tv(0, 3), tv(1, 3)});
    const InfoGaussian m = marginalize(g, VariableSet({tv(0, 3)}));
    REQUIRE((m.lambda - m.lambda.transpose()).norm() <= 1e-12 * m.lambda.norm());
    const InfoGaussian e = embed(m, g.vars);
    REQUIRE((e.lambda - e.lambda.transpose()).norm() == 0.0);
}

TEST_CASE("duplicate variables and dimension mismatches are rejected") {
    REQUIRE_THROWS_AS(VariableSet({tv(0), tv(0)}), UnknownVariable);
    REQUIRE_THROWS_AS(InfoGaussian(VariableSet({tv(0, 2)}), Eigen::VectorXd::Zero(3),
                                   Eigen::MatrixXd::Zero(3, 3)),
                      DimensionMismatch);
}
