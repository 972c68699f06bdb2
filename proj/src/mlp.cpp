#include "classbench/mlp.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>

namespace classbench {

void MlpConfig::validate() const {
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning rate must be positive");
  if (!(momentum >= 0.0 && momentum < 1.0))
    throw std::invalid_argument("momentum must lie in [0, 1)");
  if (epochs < 1) throw std::invalid_argument("epochs must be at least 1");
}

EncodedData encode_for_network(const Dataset& d) {
  const std::size_t n = d.num_instances();
  const std::size_t inputs = d.num_attributes() - 1;
  if (inputs == 0) throw std::invalid_argument("dataset has no input attributes");
  EncodedData out{Mat<double>(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(inputs)),
                  Mat<double>::Zero(static_cast<Eigen::Index>(n),
                                    static_cast<Eigen::Index>(d.num_classes())),
                  std::vector<std::size_t>(n)};
  for (std::size_t a = 0, col = 0; a < d.num_attributes(); ++a) {
    if (a == d.class_index()) continue;
    if (d.attribute(a).is_nominal())
      throw std::invalid_argument("attribute '" + d.attribute(a).name +
                                  "' is nominal; apply nominal_to_binary first");
    for (std::size_t r = 0; r < n; ++r) {
      if (d.missing(r, a))
        throw std::invalid_argument("attribute '" + d.attribute(a).name +
                                    "' has a missing value at row " + std::to_string(r));
      out.inputs(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(col)) = d(r, a);
    }
    ++col;
  }
  for (std::size_t r = 0; r < n; ++r) {
    auto c = d.class_of(r);
    if (!c) throw std::invalid_argument("row " + std::to_string(r) + " has a missing class");
    out.labels[r] = *c;
    out.targets(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(*c)) = 1.0;
  }
  return out;
}

Vec<double> encode_instance(const Dataset& d, std::size_t row) {
  Vec<double> x(static_cast<Eigen::Index>(d.num_attributes() - 1));
  for (std::size_t a = 0, col = 0; a < d.num_attributes(); ++a) {
    if (a == d.class_index()) continue;
    if (d.missing(row, a))
      throw std::invalid_argument("attribute '" + d.attribute(a).name +
                                  "' has a missing value at row " + std::to_string(row));
    x(static_cast<Eigen::Index>(col++)) = d(row, a);
  }
  return x;
}

namespace {

constexpr const char* kMagic = "classbench-mlp";
constexpr int kVersion = 1;

void write_values(std::ostream& out, const double* data, Eigen::Index count) {
  for (Eigen::Index i = 0; i < count; ++i) out << (i ? " " : "") << format_number(data[i]);
  out << '\n';
}

}  // namespace

void write_network(std::ostream& out, const MlpNetwork& net) {
  out << kMagic << ' ' << kVersion << '\n';
  out << net.inputs() << ' ' << net.hidden_units() << ' ' << net.outputs() << '\n';
  for (const auto& layer : net.layers()) {
    // weights in column-major order, one output unit per run
    write_values(out, layer.weights.data(), layer.weights.size());
    write_values(out, layer.bias.data(), layer.bias.size());
  }
}

MlpNetwork read_network(std::istream& in) {
  std::string magic;
  int version = 0;
  in >> magic >> version;
  if (magic != kMagic) throw std::runtime_error("not a classbench network file");
  if (version != kVersion)
    throw std::runtime_error("unsupported network file version " + std::to_string(version));
  std::size_t inputs = 0, hidden = 0, outputs = 0;
  if (!(in >> inputs >> hidden >> outputs) || inputs == 0 || outputs == 0)
    throw std::runtime_error("malformed network shape");
  MlpNetwork net(inputs, hidden, outputs);
  auto read = [&](double* data, Eigen::Index count) {
    for (Eigen::Index i = 0; i < count; ++i) {
      std::string token;
      if (!(in >> token)) throw std::runtime_error("truncated network file");
      auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), data[i]);
      if (ec != std::errc() || ptr != token.data() + token.size())
        throw std::runtime_error("invalid number '" + token + "' in network file");
    }
  };
  for (auto& layer : net.layers()) {
    read(layer.weights.data(), layer.weights.size());
    read(layer.bias.data(), layer.bias.size());
  }
  return net;
}

}  // namespace classbench
