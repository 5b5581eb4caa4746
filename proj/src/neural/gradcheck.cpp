#include "semrl/neural/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "semrl/core/rng.hpp"
#include "semrl/neural/layers.hpp"
#include "semrl/neural/ops.hpp"

namespace semrl::nn {

double relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), kRelErrorFloor});
}

GradCheckResult check_gradients(const std::string& name, const std::function<Tensor<double>()>& loss,
                                std::vector<Tensor<double>> inputs, double h, double tolerance,
                                const FrozenPredicate& frozen) {
  GradCheckResult r;
  r.name = name;
  backward(loss());
  std::vector<std::vector<double>> analytic;
  for (const auto& t : inputs) analytic.push_back(t.grad());

  NoGrad guard;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    auto& data = inputs[i].data();
    for (std::size_t j = 0; j < data.size(); ++j) {
      if (frozen && frozen(inputs[i], j)) continue;
      const double keep = data[j];
      data[j] = keep + h;
      const double up = loss().item();
      data[j] = keep - h;
      const double down = loss().item();
      data[j] = keep;
      const double numeric = (up - down) / (2.0 * h);
      const double a = analytic[i].empty() ? 0.0 : analytic[i][j];
      r.max_rel_error = std::max(r.max_rel_error, relative_error(a, numeric));
      r.max_abs_error = std::max(r.max_abs_error, std::abs(a - numeric));
      ++r.checked;
    }
  }
  r.passed = r.max_rel_error < tolerance;
  return r;
}

namespace {

using D = Tensor<double>;

struct Suite {
  rng::Engine eng;
  std::vector<GradCheckResult> results;

  std::vector<double> values(std::size_t n, double lo = -1.0, double hi = 1.0) {
    std::vector<double> v(n);
    for (auto& x : v) x = rng::uniform(eng, lo, hi);
    return v;
  }
  // Values kept away from zero so ReLU-style kinks are not straddled by the FD step.
  std::vector<double> away_from_zero(std::size_t n) {
    auto v = values(n, 0.05, 1.0);
    for (auto& x : v) x = rng::below(eng, 2) == 0 ? x : -x;
    return v;
  }
  D input(Shape s, const std::string& name) { return D::param(s, values(numel(s)), name); }
  D input_nz(Shape s, const std::string& name) { return D::param(s, away_from_zero(numel(s)), name); }

  // Random fixed projection so every output element matters to the loss.
  std::function<D(const D&)> projector() {
    auto seed = eng();
    return [seed](const D& t) {
      rng::Engine e(seed);
      std::vector<double> w(t.size());
      for (auto& x : w) x = rng::uniform(e, -1.0, 1.0);
      return sum(mul(t, D::from(t.shape(), std::move(w))));
    };
  }

  void check(const std::string& name, std::function<D()> loss, std::vector<D> inputs,
             const FrozenPredicate& frozen = {}) {
    results.push_back(check_gradients(name, loss, std::move(inputs), kFdStep, kGradTolerance, frozen));
  }

  // Zero-initialized biases put ReLU inputs exactly on the kink wherever a
  // window sees only padding; move them off it.
  void jitter_biases(const std::vector<D>& params) {
    for (auto p : params) {
      if (!p.name().ends_with(".b")) continue;
      for (auto& v : p.data()) v = rng::uniform(eng, 0.05, 0.3) * (rng::below(eng, 2) == 0 ? 1.0 : -1.0);
    }
  }
};

}  // namespace

std::vector<GradCheckResult> run_gradcheck_suite(std::uint64_t seed) {
  Suite s{rng::make_engine(seed, rng::Stream::kInit), {}};

  {
    auto a = s.input({3, 4}, "a"), b = s.input({4, 2}, "b");
    auto p = s.projector();
    s.check("matmul", [=] { return p(matmul(a, b)); }, {a, b});
  }
  {
    auto x = s.input({5, 3}, "x"), w = s.input({4, 3}, "w"), bias = s.input({4}, "bias");
    auto p = s.projector();
    s.check("linear", [=] { return p(linear(x, w, bias)); }, {x, w, bias});
  }
  {
    auto a = s.input({2, 3}, "a"), b = s.input({2, 3}, "b");
    auto p = s.projector();
    s.check("add", [=] { return p(add(a, b)); }, {a, b});
    s.check("sub", [=] { return p(sub(a, b)); }, {a, b});
    s.check("mul", [=] { return p(mul(a, b)); }, {a, b});
    s.check("scale", [=] { return p(scale(a, 2.5)); }, {a});
    s.check("add_scalar", [=] { return p(add_scalar(a, -0.3)); }, {a});
    s.check("exp", [=] { return p(exp(a)); }, {a});
    s.check("square", [=] { return p(square(a)); }, {a});
    s.check("sum", [=] { return scale(sum(a), 1.7); }, {a});
    s.check("mean", [=] { return scale(mean(a), 1.7); }, {a});
    s.check("reshape", [=] { return p(reshape(a, {3, 2})); }, {a});
    s.check("softmax", [=] { return p(softmax(a)); }, {a});
    s.check("log_softmax", [=] { return p(log_softmax(a)); }, {a});
    s.check("concat_cols", [=] { return p(concat_cols<double>({a, b})); }, {a, b});
    s.check("slice_cols", [=] { return p(slice_cols(a, 1, 2)); }, {a});
    s.check("gather_cols", [=] { return p(gather_cols(a, {2, 0})); }, {a});
  }
  {
    auto a = s.input_nz({3, 4}, "a");
    auto p = s.projector();
    s.check("relu", [=] { return p(relu(a)); }, {a});
    s.check("clip", [=] { return p(clip(a, -0.5, 0.5)); }, {a});
    s.check("max_rows", [=] { return p(max_rows(a)); }, {a});
    auto b = D::param({3, 4}, a.data(), "b");
    for (auto& v : b.data()) v += rng::below(s.eng, 2) == 0 ? 0.3 : -0.3;
    s.check("minimum", [=] { return p(minimum(a, b)); }, {a, b});
  }
  {
    auto x = s.input({2, 2, 5, 5}, "x"), w = s.input({3, 2, 3, 3}, "w"), bias = s.input({3}, "bias");
    auto p = s.projector();
    s.check("conv2d", [=] { return p(conv2d(x, w, bias, 1, 0)); }, {x, w, bias});
    auto p2 = s.projector();
    s.check("conv2d_stride2_pad1", [=] { return p2(conv2d(x, w, bias, 2, 1)); }, {x, w, bias});
  }
  {
    auto x = s.input({2, 7, 3}, "x"), w = s.input({4, 3, 3}, "w"), bias = s.input({4}, "bias");
    auto p = s.projector();
    s.check("conv1d", [=] { return p(conv1d(x, w, bias)); }, {x, w, bias});
    s.check("conv1d_windows", [=] { return p(conv1d(x, w, bias, {2, 5})); }, {x, w, bias});
  }
  {
    auto x = s.input({2, 6, 4}, "x");
    auto p = s.projector();
    s.check("max_over_time", [=] { return p(max_over_time(x)); }, {x});
    s.check("max_over_time_windows", [=] { return p(max_over_time(x, {3, 6})); }, {x});
  }
  {
    auto table = s.input({6, 3}, "table");
    auto p = s.projector();
    const std::vector<int> ids{1, 0, 3, 3, 5, 0};
    s.check("embedding_lookup", [=] { return p(embedding_lookup(table, ids, 2, 3)); }, {table});
    auto frozen_pad = [](const D&, std::size_t j) { return j < 3; };
    s.check("embedding_lookup_frozen_pad", [=] { return p(embedding_lookup(table, ids, 2, 3, 0)); }, {table},
            frozen_pad);
  }
  {
    auto init = rng::make_engine(seed, rng::Stream::kMinibatch);
    EncoderSpec spec;
    spec.kind = EncoderKind::kText;
    spec.vocab_size = 12;
    spec.embedding_dim = 6;
    spec.text.filters = 4;
    auto enc = make_encoder<double>(spec, init, "text");
    Linear<double> head(enc->feature_dim(), 3, init, "head");
    Batch batch;
    batch.size = 2;
    batch.length = 9;
    batch.tokens = {4, 7, 2, 9, 11, 3, 5, 0, 0, 6, 2, 8, 0, 0, 0, 0, 0, 0};
    batch.lengths = {7, 3};
    auto p = s.projector();
    std::shared_ptr<Encoder<double>> e(std::move(enc));
    auto params = e->parameters();
    for (const auto& q : head.parameters()) params.push_back(q);
    s.jitter_biases(params);
    const int d = spec.embedding_dim;
    auto pad_row = [d](const D& t, std::size_t j) { return t.name().ends_with("embedding") && j < std::size_t(d); };
    s.check("text_cnn", [=] { return p(head.forward(e->forward(batch))); }, params, pad_row);
  }
  {
    auto init = rng::make_engine(seed + 1, rng::Stream::kMinibatch);
    EncoderSpec spec;
    spec.kind = EncoderKind::kImage;
    spec.image = ImageCnnConfig{2, 7, 9, 3, 4, 5};
    std::shared_ptr<Encoder<double>> e = make_encoder<double>(spec, init, "image");
    Linear<double> head(e->feature_dim(), 3, init, "head");
    Batch batch;
    batch.size = 2;
    batch.sample_shape = {2, 7, 9};
    for (int i = 0; i < 2 * 2 * 7 * 9; ++i) batch.dense.push_back(static_cast<float>(rng::unit(s.eng)));
    auto p = s.projector();
    auto params = e->parameters();
    for (const auto& q : head.parameters()) params.push_back(q);
    s.jitter_biases(params);
    s.check("image_cnn", [=] { return p(head.forward(e->forward(batch))); }, params);
  }
  {
    auto init = rng::make_engine(seed + 3, rng::Stream::kMinibatch);
    EncoderSpec spec;
    spec.kind = EncoderKind::kText;
    spec.vocab_size = 60;
    std::shared_ptr<Encoder<double>> e = make_encoder<double>(spec, init, "text");
    Linear<double> head(e->feature_dim(), 4, init, "head");
    Batch batch;
    batch.size = 2;
    batch.length = 14;
    for (int i = 0; i < 28; ++i) batch.tokens.push_back(1 + rng::below(s.eng, 59));
    batch.lengths = {12, 4};
    for (int i = 0; i < 2; ++i) {
      for (int t = batch.lengths[i]; t < batch.length; ++t) batch.tokens[i * batch.length + t] = 0;
    }
    auto p = s.projector();
    auto params = e->parameters();
    for (const auto& q : head.parameters()) params.push_back(q);
    s.jitter_biases(params);
    const int d = spec.embedding_dim;
    auto pad_row = [d](const D& t, std::size_t j) { return t.name().ends_with("embedding") && j < std::size_t(d); };
    s.check("text_cnn_default_size", [=] { return p(head.forward(e->forward(batch))); }, params, pad_row);
  }
  {
    auto init = rng::make_engine(seed + 4, rng::Stream::kMinibatch);
    EncoderSpec spec;
    spec.kind = EncoderKind::kImage;
    spec.image = ImageCnnConfig{6, 7, 9, 16, 32, 32};
    std::shared_ptr<Encoder<double>> e = make_encoder<double>(spec, init, "image");
    Linear<double> head(e->feature_dim(), 4, init, "head");
    Batch batch;
    batch.size = 2;
    batch.sample_shape = {6, 7, 9};
    for (int i = 0; i < 2 * 6 * 7 * 9; ++i) batch.dense.push_back(rng::below(s.eng, 5) == 0 ? 1.0f : 0.0f);
    auto p = s.projector();
    auto params = e->parameters();
    for (const auto& q : head.parameters()) params.push_back(q);
    s.jitter_biases(params);
    s.check("image_cnn_default_size", [=] { return p(head.forward(e->forward(batch))); }, params);
  }
  {
    auto init = rng::make_engine(seed + 2, rng::Stream::kMinibatch);
    std::shared_ptr<Encoder<double>> e = std::make_shared<MlpEncoder<double>>(5, std::vector<int>{6}, init, "mlp");
    Batch batch;
    batch.size = 3;
    batch.sample_shape = {5};
    for (int i = 0; i < 15; ++i) batch.dense.push_back(static_cast<float>(rng::uniform(s.eng, -1, 1)));
    auto p = s.projector();
    s.jitter_biases(e->parameters());
    s.check("mlp", [=] { return p(e->forward(batch)); }, e->parameters());
  }
  return s.results;
}

}  // namespace semrl::nn
