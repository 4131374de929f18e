#include "driverid/error.hpp"
#include "driverid/models.hpp"
#include "model_impl.hpp"

namespace driverid {
namespace detail {

using nlohmann::json;

json ZeroRModel::parameters_json() const { return {{"priors", priors_}}; }

json KnnModel::parameters_json() const { return {{"k", k_}, {"points", points_}, {"targets", y_}}; }

json NaiveBayesModel::parameters_json() const {
  return {{"priors", priors_}, {"means", means_}, {"variances", variances_}};
}

json LinearModel::parameters_json() const { return {{"layout", "class-major, bias last"}, {"weights", params_}}; }

json RepTreeModel::parameters_json() const {
  json nodes = json::array();
  for (const auto& n : tree_.nodes()) {
    nodes.push_back({{"feature", n.feature},
                     {"threshold", n.threshold},
                     {"left", n.left},
                     {"right", n.right},
                     {"counts", n.counts}});
  }
  return {{"nodes", nodes}};
}

json AdaBoostModel::parameters_json() const {
  json stumps = json::array();
  for (const auto& s : boosted_.stumps) {
    stumps.push_back({{"feature", s.feature},
                      {"threshold", s.threshold},
                      {"left_class", s.left_class},
                      {"right_class", s.right_class}});
  }
  return {{"stumps", stumps}, {"alphas", boosted_.alphas}};
}

json MajorityVoteModel::parameters_json() const {
  json members = json::array();
  for (const auto& m : members_) members.push_back(m->to_json());
  return {{"members", members}};
}

namespace {

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorCode::ModelFormat, kModelsModule, what); }

void expect_size(std::size_t got, std::size_t want, const char* what) {
  if (got != want) bad(std::string(what) + " has " + std::to_string(got) + " entries, expected " + std::to_string(want));
}

TrainedModel load_impl(const json& j) {
  if (!j.is_object()) bad("model document is not an object");
  if (j.value("format_version", -1) != kModelFormatVersion) bad("unsupported model format_version");
  auto kind = parse_model_kind(j.at("kind").get<std::string>());
  if (!kind) bad("unknown model kind '" + j.at("kind").get<std::string>() + "'");
  auto classes = j.at("classes").get<std::vector<std::string>>();
  if (classes.empty()) bad("model has no classes");
  const auto dim = j.at("dimension").get<std::size_t>();
  json meta = j.value("training_metadata", json::object());
  const json& p = j.at("parameters");
  const std::size_t k = classes.size();

  switch (*kind) {
    case ModelKind::ZeroR: {
      auto priors = p.at("priors").get<std::vector<double>>();
      expect_size(priors.size(), k, "priors");
      return std::make_shared<ZeroRModel>(classes, dim, meta, priors);
    }
    case ModelKind::Knn: {
      auto points = p.at("points").get<std::vector<double>>();
      auto targets = p.at("targets").get<std::vector<std::size_t>>();
      expect_size(points.size(), targets.size() * dim, "points");
      if (targets.empty()) bad("k-NN model has no stored rows");
      for (auto t : targets) {
        if (t >= k) bad("k-NN target out of range");
      }
      return std::make_shared<KnnModel>(classes, dim, meta, p.at("k").get<std::size_t>(), points, targets);
    }
    case ModelKind::NaiveBayes: {
      auto priors = p.at("priors").get<std::vector<double>>();
      auto means = p.at("means").get<std::vector<double>>();
      auto vars = p.at("variances").get<std::vector<double>>();
      expect_size(priors.size(), k, "priors");
      expect_size(means.size(), k * dim, "means");
      expect_size(vars.size(), k * dim, "variances");
      return std::make_shared<NaiveBayesModel>(classes, dim, meta, priors, means, vars);
    }
    case ModelKind::Logistic:
    case ModelKind::Svm: {
      auto w = p.at("weights").get<std::vector<double>>();
      expect_size(w.size(), k * (dim + 1), "weights");
      return std::make_shared<LinearModel>(*kind, classes, dim, meta, w);
    }
    case ModelKind::RepTree: {
      std::vector<tree::Node> nodes;
      for (const auto& n : p.at("nodes")) {
        tree::Node node;
        node.feature = n.at("feature").get<int>();
        node.threshold = n.at("threshold").get<double>();
        node.left = n.at("left").get<std::int32_t>();
        node.right = n.at("right").get<std::int32_t>();
        node.counts = n.at("counts").get<std::vector<double>>();
        if (node.feature >= static_cast<int>(dim)) bad("tree split feature out of range");
        nodes.push_back(std::move(node));
      }
      if (nodes.empty()) bad("tree has no nodes");
      return std::make_shared<RepTreeModel>(classes, dim, meta, tree::DecisionTree(k, std::move(nodes)));
    }
    case ModelKind::AdaBoost: {
      boost::BoostedStumps b;
      b.classes = k;
      for (const auto& s : p.at("stumps")) {
        boost::Stump st{s.at("feature").get<int>(), s.at("threshold").get<double>(),
                        s.at("left_class").get<std::size_t>(), s.at("right_class").get<std::size_t>()};
        if (st.feature >= static_cast<int>(dim) || st.left_class >= k || st.right_class >= k) bad("stump out of range");
        b.stumps.push_back(st);
      }
      b.alphas = p.at("alphas").get<std::vector<double>>();
      expect_size(b.alphas.size(), b.stumps.size(), "alphas");
      return std::make_shared<AdaBoostModel>(classes, dim, meta, std::move(b));
    }
    case ModelKind::MajorityVote: {
      std::vector<TrainedModel> members;
      for (const auto& m : p.at("members")) members.push_back(load_impl(m));
      if (members.empty()) bad("vote has no members");
      for (const auto& m : members) {
        if (m->classes() != classes || m->dimension() != dim) bad("vote member disagrees with ensemble");
      }
      return std::make_shared<MajorityVoteModel>(classes, dim, meta, std::move(members));
    }
  }
  bad("unknown model kind");
}

}  // namespace
}  // namespace detail

TrainedModel load_model(const nlohmann::json& j) {
  try {
    return detail::load_impl(j);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ModelFormat, detail::kModelsModule, e.what());
  }
}

}  // namespace driverid
