#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "distlab/bandit.hpp"
#include "distlab/rng.hpp"

using namespace distlab;

namespace {

cb_environment two_arm_env(double mean0, double mean1) {
    // Two-point costs on a 21-atom grid with the requested means.
    const grid_spec g(21);
    auto arm = [&](double m) {
        std::vector<double> p(21, 0.0);
        p[20] = m; // mass on atom 1.0
        p[0] = 1.0 - m;
        return grid_categorical(g, std::move(p));
    };
    std::vector<std::vector<grid_categorical>> cost;
    cost.push_back({arm(mean0), arm(mean1)});
    return cb_environment::build(g, {1.0}, std::move(cost));
}

} // namespace

TEST_CASE("reigw_weights") {
    SUBCASE("equal means give the uniform split") {
        const auto p = reigw_weights({0.3, 0.3}, 4.0);
        CHECK(p[0] == doctest::Approx(0.5));
        CHECK(p[1] == doctest::Approx(0.5));
    }
    SUBCASE("direct evaluation") {
        const auto p = reigw_weights({0.2, 0.4}, 10.0);
        CHECK(p[1] == doctest::Approx(0.2 / (0.4 + 2.0)).epsilon(1e-12)); // 1/12
        CHECK(p[0] == doctest::Approx(11.0 / 12.0).epsilon(1e-12));
    }
    SUBCASE("floored near-zero best concentrates on the best arm") {
        const auto p = reigw_weights({0.0, 0.3}, 10.0);
        const double expect1 = 1e-6 / (2e-6 + 10.0 * (0.3 - 1e-6));
        CHECK(p[1] == doctest::Approx(expect1).epsilon(1e-9));
        CHECK(p[0] == doctest::Approx(1.0 - expect1).epsilon(1e-9));
        CHECK(p[0] > 0.999);
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(reigw_weights({0.1, 0.2}, 3.0), parameter_error); // gamma < 2A
        CHECK_THROWS_AS(reigw_weights({0.1, std::nan("")}, 10.0), input_error);
    }
    SUBCASE("output is a distribution with the best arm maximal") {
        rng gen(21);
        for (int trial = 0; trial < 500; ++trial) {
            const int a_count = 2 + gen.next_int(8);
            std::vector<double> fhat(static_cast<std::size_t>(a_count));
            for (double& v : fhat) v = gen.next_double();
            const double gamma = 2.0 * a_count + gen.next_double() * 50.0;
            const auto p = reigw_weights(fhat, gamma);
            double s = 0.0;
            double best_w = 0.0;
            int b = 0;
            for (int a = 0; a < a_count; ++a) {
                CHECK(p[static_cast<std::size_t>(a)] >= 0.0);
                CHECK(p[static_cast<std::size_t>(a)] <= 1.0);
                s += p[static_cast<std::size_t>(a)];
                if (fhat[static_cast<std::size_t>(a)] < fhat[static_cast<std::size_t>(b)]) b = a;
                best_w = std::max(best_w, p[static_cast<std::size_t>(a)]);
            }
            CHECK(std::abs(s - 1.0) <= 1e-12);
            CHECK(p[static_cast<std::size_t>(b)] == doctest::Approx(best_w));
        }
    }
    SUBCASE("weight non-increasing in own predicted mean") {
        std::vector<double> fhat{0.2, 0.5, 0.7};
        const auto base = reigw_weights(fhat, 20.0);
        fhat[1] = 0.6;
        const auto bumped = reigw_weights(fhat, 20.0);
        CHECK(bumped[1] <= base[1] + 1e-15);
    }
}

TEST_CASE("gamma_theorem") {
    // sqrt branch below the floor.
    CHECK(gamma_theorem(3, 0.0, 0.0, 0.5) == doctest::Approx(30.0));
    // A=2, C*=100, Regret_log=3, delta=0.1.
    const double lt = std::log(10.0);
    const double expect_sqrt = std::sqrt(40.0 * 2 * (100.0 + lt) / (112.0 * (3.0 + lt)));
    CHECK(expect_sqrt == doctest::Approx(3.712).epsilon(1e-3));
    CHECK(gamma_theorem(2, 100.0, 3.0, 0.1) == doctest::Approx(20.0));
    // A=1, C*=1e6: sqrt branch dominates.
    const double big = std::sqrt(40.0 * (1e6 + lt) / (112.0 * (1.0 + lt)));
    CHECK(big == doctest::Approx(328.85).epsilon(1e-3));
    CHECK(gamma_theorem(1, 1e6, 1.0, 0.1) == doctest::Approx(big).epsilon(1e-12));
    CHECK_THROWS_AS(gamma_theorem(2, 1.0, 1.0, 1.5), parameter_error);
}

TEST_CASE("gamma_schedule") {
    const auto c = gamma_schedule::constant(12.0);
    CHECK(c.value(1) == 12.0);
    CHECK(c.value(999) == 12.0);
    const auto p = gamma_schedule::power(4.0, 0.5);
    CHECK(p.value(1) == doctest::Approx(4.0));
    CHECK(p.value(100) == doctest::Approx(40.0));
    auto episode_zero = [&] { return p.value(0); };
    CHECK_THROWS_AS(episode_zero(), parameter_error);
}

TEST_CASE("run_distcb basic behavior") {
    SUBCASE("single action means zero regret") {
        const grid_spec g(3);
        std::vector<std::vector<grid_categorical>> cost;
        cost.push_back({grid_categorical(g, {0.5, 0.5, 0.0})});
        const auto env = cb_environment::build(g, {1.0}, std::move(cost));
        tabular_mean_oracle oracle(1, 1);
        const auto trace = run_distcb(env, oracle, gamma_schedule::constant(2.0), 200, 3);
        CHECK(trace.final_cum_regret() == doctest::Approx(0.0));
    }
    SUBCASE("zero episodes gives an empty trace") {
        const auto env = two_arm_env(0.2, 0.6);
        tabular_mean_oracle oracle(1, 2);
        const auto trace = run_distcb(env, oracle, gamma_schedule::constant(4.0), 0, 3);
        CHECK(trace.episodes() == 0);
    }
    SUBCASE("known-truth oracle beats uniform play on a paired seed") {
        const auto env = two_arm_env(0.1, 0.6);
        std::vector<cond_key> keys{{0, 0}, {0, 1}};
        std::vector<std::vector<grid_categorical>> members{{env.cost[0][0], env.cost[0][1]}};
        auto cls = std::make_shared<const cond_dist_class>(std::move(keys), std::move(members));
        ew_cost_oracle oracle(cls, 2);
        const auto trace =
            run_distcb(env, oracle, gamma_schedule::constant(200.0), 1000, 11);

        // Paired-seed uniform-random baseline with the same accounting.
        rng ctx = rng(11).derive({stream::context});
        rng act = rng(11).derive({stream::action});
        double uniform_regret = 0.0;
        for (int k = 0; k < 1000; ++k) {
            const int x = env.sample_context(ctx);
            const int a = act.next_int(2);
            uniform_regret += env.mean_table[static_cast<std::size_t>(x)]
                                            [static_cast<std::size_t>(a)] -
                              env.best_mean[static_cast<std::size_t>(x)];
        }
        CHECK(trace.final_cum_regret() < uniform_regret);
    }
    SUBCASE("trace bookkeeping") {
        const auto env = two_arm_env(0.3, 0.5);
        tabular_logloss_oracle oracle(1, 2);
        const auto trace = run_distcb(env, oracle, gamma_schedule::constant(4.0), 500, 5);
        double acc = 0.0;
        for (long k = 0; k < trace.episodes(); ++k) {
            CHECK(trace.inst_regret[static_cast<std::size_t>(k)] >= 0.0);
            acc += trace.inst_regret[static_cast<std::size_t>(k)];
            CHECK(trace.cum_regret[static_cast<std::size_t>(k)] ==
                  doctest::Approx(acc).epsilon(1e-12));
            if (k > 0)
                CHECK(trace.cum_regret[static_cast<std::size_t>(k)] >=
                      trace.cum_regret[static_cast<std::size_t>(k - 1)]);
        }
    }
}

TEST_CASE("squarecb and fastcb") {
    SUBCASE("single action means zero regret for both") {
        const grid_spec g(3);
        std::vector<std::vector<grid_categorical>> cost;
        cost.push_back({grid_categorical(g, {1.0, 0.0, 0.0})});
        const auto env = cb_environment::build(g, {1.0}, std::move(cost));
        tabular_mean_oracle sq(1, 1);
        tabular_logloss_oracle ll(1, 1);
        CHECK(run_squarecb(env, sq, gamma_schedule::constant(1.0), 100, 1).final_cum_regret() ==
              doctest::Approx(0.0));
        CHECK(run_fastcb(env, ll, gamma_schedule::constant(2.0), 100, 1).final_cum_regret() ==
              doctest::Approx(0.0));
    }
    SUBCASE("gamma to infinity concentrates on the greedy action") {
        const std::vector<double> means{0.2, 0.5, 0.9};
        rng gen(8);
        long greedy_igw = 0, greedy_reigw = 0;
        const auto p_igw = igw_weights(means, 1e6);
        const auto p_reigw = reigw_weights(means, 1e6);
        for (int i = 0; i < 10000; ++i) {
            if (gen.sample_categorical(p_igw) == 0) ++greedy_igw;
            if (gen.sample_categorical(p_reigw) == 0) ++greedy_reigw;
        }
        CHECK(greedy_igw >= 9990);
        CHECK(greedy_reigw >= 9990);
    }
}

TEST_CASE("batch parameter updates the oracle batch times per episode") {
    const auto env = two_arm_env(0.2, 0.7);
    struct counting_oracle : cb_mean_oracle {
        long updates = 0;
        std::vector<double> predict_means(int) override { return {0.4, 0.5}; }
        void update(int, int, int, double) override { ++updates; }
    } oracle;
    run_distcb(env, oracle, gamma_schedule::constant(4.0), 25, 0, 4);
    CHECK(oracle.updates == 100);
}
