#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "mocoguard/errors.hpp"
#include "mocoguard/eval.hpp"
#include "mocoguard/instance_gen.hpp"
#include "mocoguard/pareto.hpp"
#include "mocoguard/train.hpp"

using namespace mocoguard;

namespace {

TrainConfig tiny_config() {
    TrainConfig cfg;
    cfg.n = 6;
    cfg.epochs = 2;
    cfg.epoch_size = 16;
    cfg.batch = 4;
    cfg.rollouts = 4;
    cfg.grid_h = 10;
    cfg.policy.hidden = 16;
    cfg.policy.heads = 2;
    cfg.policy.layers = 1;
    cfg.policy.ff_hidden = 32;
    cfg.val_instances = 3;
    cfg.val_grid_h = 4;
    cfg.seed = 5;
    return cfg;
}

}  // namespace

TEST_CASE("advantages") {
    CHECK(advantages(std::vector<double>{1.0, 3.0}) == std::vector<double>{-1.0, 1.0});
    const auto a = advantages(std::vector<double>{2.0, 2.0, 2.0});
    for (double v : a) CHECK(v == 0.0);
}

TEST_CASE("equal losses give a zero gradient") {
    // n = 2: every rollout is forced, so all losses tie within a sample.
    Instance inst;
    inst.kind = ProblemKind::BiTSP;
    inst.features = Matrix::from_rows({{0.1, 0.2, 0.3, 0.4}, {0.9, 0.8, 0.7, 0.6}});
    PolicyConfig pc;
    pc.hidden = 8;
    pc.heads = 2;
    pc.layers = 1;
    pc.ff_hidden = 8;
    const Policy p = Policy::init(pc, 1);
    const std::vector<StepSample> samples{{&inst, Preference({0.5, 0.5}), 3}};
    const auto g = policy_gradient(p, samples, 2);
    CHECK(g.metrics.grad_norm == 0.0);
    CHECK(g.metrics.mean_abs_advantage == 0.0);
}

TEST_CASE("a constant loss offset leaves the gradient unchanged") {
    const auto cfg = tiny_config();
    const Policy p = Policy::init(cfg.policy, 2);
    const auto data = gen_uniform(ProblemKind::BiTSP, 6, 3, 8);
    std::vector<StepSample> samples;
    for (std::size_t i = 0; i < data.size(); ++i) samples.push_back({&data[i], Preference({0.3, 0.7}), 10 + i});
    const auto a = policy_gradient(p, samples, 4);
    LossOptions shifted;
    shifted.loss_offset = 17.0;
    const auto b = policy_gradient(p, samples, 4, shifted);
    for (std::size_t k = 0; k < a.grads.values.size(); ++k)
        for (std::size_t e = 0; e < a.grads.values[k].data.size(); ++e)
            CHECK(b.grads.values[k].data[e] == doctest::Approx(a.grads.values[k].data[e]).epsilon(1e-9).scale(1e-12));
    CHECK(b.metrics.mean_loss == doctest::Approx(a.metrics.mean_loss + 17.0));
}

TEST_CASE("tchebycheff loss needs an ideal point") {
    const auto cfg = tiny_config();
    const Policy p = Policy::init(cfg.policy, 2);
    const auto data = gen_uniform(ProblemKind::BiTSP, 6, 1, 8);
    const std::vector<StepSample> samples{{&data[0], Preference({0.3, 0.7}), 1}};
    LossOptions tch;
    tch.scalarization = Scalarization::Tchebycheff;
    CHECK_THROWS_AS(policy_gradient(p, samples, 4, tch), ConfigError);
    IdealPoint z;
    tch.ideal = &z;
    CHECK_NOTHROW(policy_gradient(p, samples, 4, tch));
    CHECK(z.value().size() == 2);
}

TEST_CASE("adam first step moves every coordinate by about lr") {
    tape::ParamSet p;
    p.add("w", Matrix::from_rows({{1.0, -2.0, 0.5}}));
    tape::ParamSet g = p.zeros_like();
    g.values[0] = Matrix::from_rows({{0.3, -4.0, 1e-3}});
    Adam adam(p, {0.01, 0.9, 0.999, 1e-8});
    adam.step(p, g);
    CHECK(p.values[0](0, 0) == doctest::Approx(0.99).epsilon(1e-6));
    CHECK(p.values[0](0, 1) == doctest::Approx(-1.99).epsilon(1e-6));
    CHECK(p.values[0](0, 2) == doctest::Approx(0.49).epsilon(1e-4));
    CHECK(adam.steps() == 1);
}

TEST_CASE("config json round trip and validation") {
    auto cfg = tiny_config();
    cfg.adam.lr = 3e-4;
    const auto back = TrainConfig::from_json(cfg.to_json());
    CHECK(back.to_json() == cfg.to_json());
    CHECK(TrainConfig::from_json(nlohmann::json::object()).to_json() == TrainConfig{}.to_json());
    CHECK_THROWS_AS(TrainConfig::from_json({{"learning_rate", 1.0}}), ConfigError);
    auto bad = cfg;
    bad.rollouts = 1;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = cfg;
    bad.batch = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    CHECK(TrainConfig{}.grid().size() == 101);
    auto tri = TrainConfig{};
    tri.kind = ProblemKind::TriTSP;
    CHECK(tri.grid().size() == 105);
}

TEST_CASE("epoch plans are deterministic") {
    const auto cfg = tiny_config();
    const auto a = plan_epoch(cfg, 0);
    const auto b = plan_epoch(cfg, 0);
    CHECK(a.clean == b.clean);
    CHECK(a.batches == b.batches);
    CHECK(a.pref_index == b.pref_index);
    CHECK(a.batches.size() == cfg.batches_per_epoch());
    CHECK_FALSE(plan_epoch(cfg, 1).clean == a.clean);
}

TEST_CASE("zero epochs return the initial policy") {
    auto cfg = tiny_config();
    cfg.epochs = 0;
    const Policy init = Policy::init(cfg.policy, 9);
    const auto r = train_clean(cfg, init);
    CHECK(r.last.params() == init.params());
    CHECK(r.best.params() == init.params());
}

TEST_CASE("training is bitwise reproducible") {
    const auto cfg = tiny_config();
    std::vector<tape::ParamSet> seen_a, seen_b;
    const auto a = train_clean(cfg, std::nullopt, [&](std::uint64_t, const Policy& p, const StepMetrics&) {
        seen_a.push_back(p.params());
    });
    const auto b = train_clean(cfg, std::nullopt, [&](std::uint64_t, const Policy& p, const StepMetrics&) {
        seen_b.push_back(p.params());
    });
    CHECK(seen_a.size() == cfg.batches_per_epoch() * cfg.epochs);
    CHECK(seen_a == seen_b);
    CHECK(a.last.params() == b.last.params());
    REQUIRE(a.log.size() == b.log.size());
    auto same = [](double x, double y) { return x == y || (std::isnan(x) && std::isnan(y)); };
    for (std::size_t i = 0; i < a.log.size(); ++i) {
        CHECK(same(a.log[i].mean_loss, b.log[i].mean_loss));
        CHECK(same(a.log[i].val_hv, b.log[i].val_hv));
    }
}

TEST_CASE("short training improves the hypervolume") {
    auto cfg = tiny_config();
    cfg.epochs = 1;
    cfg.epoch_size = 2000;
    cfg.batch = 8;
    cfg.rollouts = 6;
    cfg.adam.lr = 1e-3;
    const Policy init = Policy::init(cfg.policy, cfg.seed);
    const auto test = gen_uniform(ProblemKind::BiTSP, 6, 10, 4242);
    const auto grid = preference_grid(2, 10);
    const auto before = model_fronts(init, test, grid);
    const auto r = train_clean(cfg, init);
    const auto after = model_fronts(r.last, test, grid);
    const auto oracle = oracle_fronts(test, grid);
    std::vector<std::vector<ObjectiveVector>> all = before;
    all.insert(all.end(), oracle.begin(), oracle.end());
    const auto ref = reference_point(all);
    const auto c0 = compare_fronts(before, oracle, ref);
    const auto c1 = compare_fronts(after, oracle, ref);
    MESSAGE("gap before " << c0.gap << "% after " << c1.gap << "%");
    CHECK(c1.gap < c0.gap);
}

TEST_CASE("train log csv") {
    const auto path = std::filesystem::temp_directory_path() / "mocoguard_log.csv";
    const std::vector<TrainLogRow> rows{{0, 1.5, 0.25, std::nan("")}, {1, 1.25, 0.5, 0.75}};
    write_train_log(path, rows);
    std::ifstream in(path);
    std::string header, r0, r1;
    std::getline(in, header);
    std::getline(in, r0);
    std::getline(in, r1);
    CHECK(header == "step,mean_loss,grad_norm,val_hv");
    CHECK(r0 == "0,1.5,0.25,");
    CHECK(r1 == "1,1.25,0.5,0.75");
    std::filesystem::remove(path);
}
