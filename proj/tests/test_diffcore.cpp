#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "pico/error.hpp"
#include "pico/gradcheck.hpp"
#include "pico/models.hpp"
#include "pico/optim.hpp"
#include "pico/rng.hpp"
#include "pico/tape.hpp"

using namespace pico;

namespace {

Tensor random_vector(int n, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t({n});
  for (int i = 0; i < n; ++i) t[i] = rng.uniform(lo, hi);
  return t;
}

Tensor random_matrix(int m, int n, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t({m, n});
  for (int i = 0; i < t.size(); ++i) t[i] = rng.uniform(lo, hi);
  return t;
}

}  // namespace

TEST_CASE("forward_affine identity and relu clamp") {
  Tensor identity({2, 2}, {1, 0, 0, 1});
  Tensor zero_bias({2});
  Tensor x({2}, {3, -2});
  Tensor relu_out = forward_affine(x, identity, zero_bias, Activation::relu);
  CHECK(relu_out[0] == 3.0);
  CHECK(relu_out[1] == 0.0);
  Tensor lin_out = forward_affine(x, identity, zero_bias, Activation::linear);
  CHECK(lin_out[0] == 3.0);
  CHECK(lin_out[1] == -2.0);
}

TEST_CASE("forward_affine sums inputs plus bias") {
  Tensor w({1, 2}, {1, 1});
  Tensor b({1}, {1});
  Tensor x({2}, {2, 3});
  Tensor out = forward_affine(x, w, b, Activation::linear);
  CHECK(out[0] == 6.0);
}

TEST_CASE("forward_affine raises on shape mismatch naming operands") {
  Tensor w({2, 3});
  Tensor b({2});
  Tensor x({2});
  CHECK_THROWS_AS(forward_affine(x, w, b, Activation::linear), DimensionError);
  try {
    forward_affine(x, w, b, Activation::linear);
  } catch (const DimensionError& e) {
    std::string msg = e.what();
    CHECK(msg.find("[2x3]") != std::string::npos);
    CHECK(msg.find("[2]") != std::string::npos);
  }
}

TEST_CASE("softmax basics") {
  Tensor uniform = softmax(Tensor({3}, {0, 0, 0}));
  for (int i = 0; i < 3; ++i) CHECK(uniform[i] == doctest::Approx(1.0 / 3).epsilon(1e-12));

  double c = 7.25;
  Tensor ratio = softmax(Tensor({2}, {c, c + std::log(3.0)}));
  CHECK(ratio[0] == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(ratio[1] == doctest::Approx(0.75).epsilon(1e-12));

  Tensor large = softmax(Tensor({2}, {1000.0, 1000.0}));
  CHECK(large[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(large.all_finite());

  CHECK_THROWS_AS(softmax(Tensor({0})), DimensionError);
}

TEST_CASE("softmax properties: normalization and shift invariance") {
  Rng rng(2024);
  for (int it = 0; it < 1000; ++it) {
    int k = 1 + static_cast<int>(rng.below(6));
    Tensor logits = random_vector(k, rng, -30.0, 30.0);
    Tensor probs = softmax(logits);
    double sum = 0.0;
    for (int i = 0; i < k; ++i) {
      CHECK(probs[i] >= 0.0);
      sum += probs[i];
    }
    CHECK(std::abs(sum - 1.0) <= 1e-12);

    double shift = rng.uniform(-50.0, 50.0);
    Tensor shifted = logits;
    for (int i = 0; i < k; ++i) shifted[i] += shift;
    Tensor probs2 = softmax(shifted);
    for (int i = 0; i < k; ++i) CHECK(std::abs(probs[i] - probs2[i]) <= 1e-12);
  }
}

TEST_CASE("mse_loss examples") {
  Tensor a({3}, {1, 2, 3});
  CHECK(mse_loss(a, a) == 0.0);
  Tensor b({3}, {2, 3, 4});
  CHECK(mse_loss(a, b) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(mse_loss(Tensor({1}, {2.0}), Tensor({1}, {0.0})) == 4.0);
  CHECK_THROWS_AS(mse_loss(a, Tensor({2})), DimensionError);
}

TEST_CASE("backward: analytic derivatives on scalar cases") {
  // loss = w^2 at w = 3 -> grad 6, via mse([w], [0]).
  ParameterSet params;
  params.insert("w", Tensor({1}, {3.0}));
  Tape tape(true);
  Session session(tape, params);
  Value loss = mse(session("w"), Tensor({1}, {0.0}));
  CHECK(loss.tensor()[0] == 9.0);
  tape.backward(loss);
  auto grads = session.gradients();
  CHECK(grads.at("w")[0] == doctest::Approx(6.0).epsilon(1e-15));
}

TEST_CASE("backward: d mse([w],[0]) / dw at w=2 is 4") {
  ParameterSet params;
  params.insert("w", Tensor({1}, {2.0}));
  Tape tape(true);
  Session session(tape, params);
  Value loss = mse(session("w"), Tensor({1}, {0.0}));
  tape.backward(loss);
  CHECK(session.gradients().at("w")[0] == doctest::Approx(4.0).epsilon(1e-15));
}

TEST_CASE("backward without a recording tape raises") {
  ParameterSet params;
  params.insert("w", Tensor({1}, {2.0}));
  Tape tape(false);
  Session session(tape, params);
  Value loss = mse(session("w"), Tensor({1}, {0.0}));
  CHECK_THROWS_AS(tape.backward(loss), StateError);
  CHECK_THROWS_AS(session.gradients(), StateError);
}

TEST_CASE("eval and training mode forwards are identical") {
  Rng rng(7);
  ParameterSet params;
  params.insert("W", random_matrix(4, 3, rng));
  params.insert("b", random_vector(4, rng));
  Tensor x = random_vector(3, rng);

  Tape train_tape(true);
  Session train_session(train_tape, params);
  Value out_train =
      affine(train_tape.constant(x), train_session("W"), train_session("b"), Activation::relu);

  Tape eval_tape(false);
  Session eval_session(eval_tape, params);
  Value out_eval =
      affine(eval_tape.constant(x), eval_session("W"), eval_session("b"), Activation::relu);

  for (int i = 0; i < 4; ++i) CHECK(out_train.tensor()[i] == out_eval.tensor()[i]);
}

TEST_CASE("backward linearity: grad of sum equals sum of grads") {
  Rng rng(11);
  for (int it = 0; it < 50; ++it) {
    ParameterSet params;
    params.insert("W", random_matrix(3, 3, rng));
    params.insert("b", random_vector(3, rng));
    Tensor x1 = random_vector(3, rng), x2 = random_vector(3, rng);
    Tensor t1 = random_vector(3, rng), t2 = random_vector(3, rng);

    auto grads_for = [&](bool first, bool second) {
      Tape tape(true);
      Session session(tape, params);
      std::vector<Value> losses;
      if (first)
        losses.push_back(
            mse(affine(tape.constant(x1), session("W"), session("b"), Activation::relu), t1));
      if (second)
        losses.push_back(
            mse(affine(tape.constant(x2), session("W"), session("b"), Activation::relu), t2));
      Value total = losses.size() == 1 ? losses[0] : add(losses[0], losses[1]);
      tape.backward(total);
      return session.gradients();
    };

    auto g1 = grads_for(true, false);
    auto g2 = grads_for(false, true);
    auto g12 = grads_for(true, true);
    for (const auto& [name, g] : g12)
      for (int i = 0; i < g.size(); ++i)
        CHECK(std::abs(g[i] - (g1.at(name)[i] + g2.at(name)[i])) <= 1e-12);
  }
}

TEST_CASE("grad_check: single affine layer") {
  Rng rng(3);
  ParameterSet params;
  params.insert("W", random_matrix(5, 4, rng));
  params.insert("b", random_vector(5, rng));
  Tensor x = random_vector(4, rng);
  Tensor target = random_vector(5, rng);
  auto build = [&](Session& s) {
    return mse(affine(s.tape().constant(x), s("W"), s("b"), Activation::linear), target);
  };
  auto report = grad_check(build, params);
  CHECK(report.checked == 25);
  CHECK(report.max_rel_error < 1e-6);
}

TEST_CASE("grad_check: relu layer with inputs away from the kink") {
  Rng rng(5);
  ParameterSet params;
  params.insert("W", Tensor({3, 3}, {1, 0, 0, 0, 1, 0, 0, 0, 1}));
  params.insert("b", Tensor({3}));
  // Inputs bounded away from 0 by much more than eps.
  Tensor x({3}, {0.5, -0.7, 1.2});
  Tensor target({3}, {0.1, 0.0, 0.3});
  auto build = [&](Session& s) {
    return mse(affine(s.tape().constant(x), s("W"), s("b"), Activation::relu), target);
  };
  auto report = grad_check(build, params);
  CHECK(report.max_rel_error < 1e-6);
}

TEST_CASE("grad_check: frozen parameters are excluded from the report") {
  Rng rng(9);
  ParameterSet params;
  params.insert("W", random_matrix(2, 2, rng));
  params.insert("b", random_vector(2, rng));
  params.freeze("b");
  Tensor x = random_vector(2, rng);
  auto build = [&](Session& s) {
    return mse(affine(s.tape().constant(x), s("W"), s("b"), Activation::linear), Tensor({2}));
  };
  auto report = grad_check(build, params);
  CHECK(report.checked == 4);  // only W's entries
}

TEST_CASE("grad_check rejects a non-deterministic forward") {
  ParameterSet params;
  params.insert("w", Tensor({1}, {1.0}));
  int calls = 0;
  auto build = [&](Session& s) {
    ++calls;
    Tensor target({1}, {static_cast<double>(calls)});
    return mse(s("w"), target);
  };
  CHECK_THROWS_AS(grad_check(build, params), DeterminismError);
}

TEST_CASE("grad_check: composite ops match finite differences on random nets") {
  Rng rng(17);
  for (int it = 0; it < 20; ++it) {
    int in = 2 + static_cast<int>(rng.below(3));
    int hid = 2 + static_cast<int>(rng.below(4));
    int out = 1 + static_cast<int>(rng.below(3));
    ParameterSet params;
    params.insert("W0", random_matrix(hid, in, rng));
    params.insert("b0", random_vector(hid, rng));
    params.insert("W1", random_matrix(out, hid, rng));
    params.insert("b1", random_vector(out, rng));
    params.insert("gate", random_vector(out, rng));
    Tensor x = random_vector(in, rng);
    Tensor target = random_vector(out, rng);

    auto build = [&](Session& s) {
      Value h = affine(s.tape().constant(x), s("W0"), s("b0"), Activation::relu);
      Value y = affine(h, s("W1"), s("b1"), Activation::linear);
      Value lambda = softmax(s("gate"));
      Value mixed = blend(lambda, {y, tanh(y)});
      std::vector<Value> parts = {mse(mixed, target), pick(log_softmax(s("gate")), 0)};
      return add(mean(parts), scale(logaddexp(pick(y, 0), pick(tanh(y), 0)), 0.25));
    };
    auto report = grad_check(build, params);
    // Loose bound: random ReLU inputs may sit near the kink.
    CHECK(report.max_rel_error < 1e-4);
  }
}

TEST_CASE("matvec and tanh gradients") {
  Rng rng(23);
  ParameterSet params;
  params.insert("W", random_matrix(3, 3, rng));
  Tensor x = random_vector(3, rng);
  auto build = [&](Session& s) {
    return mse(tanh(matvec(s("W"), s.tape().constant(x))), Tensor({3}));
  };
  auto report = grad_check(build, params);
  CHECK(report.max_rel_error < 1e-6);
}

TEST_CASE("frozen leaves receive no gradient") {
  ParameterSet params;
  params.insert("a", Tensor({1}, {2.0}));
  params.insert("b", Tensor({1}, {3.0}));
  params.freeze("b");
  Tape tape(true);
  Session session(tape, params);
  Value loss = mse(add(session("a"), session("b")), Tensor({1}));
  tape.backward(loss);
  auto grads = session.gradients();
  CHECK(grads.count("a") == 1);
  CHECK(grads.count("b") == 0);
}

TEST_CASE("Adam: lr 0 leaves parameters bitwise unchanged") {
  ParameterSet params;
  params.insert("w", Tensor({2}, {1.25, -7.5}));
  AdamConfig cfg;
  cfg.learning_rate = 0.0;
  Adam adam(cfg);
  std::map<std::string, Tensor> grads;
  grads.emplace("w", Tensor({2}, {0.3, -0.4}));
  adam.step(params, grads);
  CHECK(params.at("w")[0] == 1.25);
  CHECK(params.at("w")[1] == -7.5);
}

TEST_CASE("Adam moves parameters against the gradient") {
  ParameterSet params;
  params.insert("w", Tensor({1}, {1.0}));
  Adam adam(AdamConfig{});
  std::map<std::string, Tensor> grads;
  grads.emplace("w", Tensor({1}, {1.0}));
  adam.step(params, grads);
  CHECK(params.at("w")[0] < 1.0);
}

TEST_CASE("clip_global_norm scales only above the threshold") {
  std::map<std::string, Tensor> grads;
  grads.emplace("a", Tensor({2}, {3.0, 4.0}));  // norm 5
  double norm = clip_global_norm(grads, 10.0);
  CHECK(norm == doctest::Approx(5.0));
  CHECK(grads.at("a")[0] == 3.0);

  norm = clip_global_norm(grads, 2.5);
  CHECK(norm == doctest::Approx(5.0));
  CHECK(grads.at("a")[0] == doctest::Approx(1.5));
  CHECK(grads.at("a")[1] == doctest::Approx(2.0));

  grads.at("a")[0] = std::nan("");
  CHECK_THROWS_AS(clip_global_norm(grads, 1.0), NumericalError);
}

TEST_CASE("ParameterSet enforces unique names and tracks the frozen set") {
  ParameterSet params;
  params.insert("x", Tensor({1}));
  CHECK_THROWS_AS(params.insert("x", Tensor({1})), ValidationError);
  CHECK_THROWS_AS(params.freeze("missing"), ValidationError);
  params.insert("prefix.a", Tensor({1}));
  params.insert("prefix.b", Tensor({1}));
  params.freeze_prefix("prefix.");
  CHECK(params.is_frozen("prefix.a"));
  CHECK(params.is_frozen("prefix.b"));
  CHECK(!params.is_frozen("x"));
}

TEST_CASE("Rng streams are deterministic and distinct") {
  Rng a = Rng::stream(42, "data");
  Rng b = Rng::stream(42, "data");
  Rng c = Rng::stream(42, "init");
  std::uint64_t va = a.next_u64(), vb = b.next_u64(), vc = c.next_u64();
  CHECK(va == vb);
  CHECK(va != vc);

  Rng d1 = Rng::derive(42, 0);
  Rng d2 = Rng::derive(42, 1);
  CHECK(d1.next_u64() != d2.next_u64());
}
