#ifndef BISTOCH_JSON_IO_HPP
#define BISTOCH_JSON_IO_HPP

#include <string>
#include <vector>

#include <json.hpp>

#include "bistoch/coupling.hpp"
#include "bistoch/markov_operator.hpp"
#include "bistoch/polymorphism.hpp"

namespace bistoch {

// ordered_json keeps key order as written, which the byte-stable report
// contract relies on.
using Json = nlohmann::ordered_json;

template <typename S>
Json scalar_to_json(const S& v) {
  if constexpr (ScalarTraits<S>::exact)
    return Json(rational_to_string(v));
  else
    return Json(v);
}

// Accepts rational/decimal strings in both modes and raw JSON numbers; a
// number feeding exact mode becomes the exact value of its double.
template <typename S>
S scalar_from_json(const Json& j) {
  if (j.is_string()) return ScalarTraits<S>::parse(j.template get<std::string>());
  if (j.is_number()) {
    if constexpr (ScalarTraits<S>::exact) {
      Rat q(j.template get<double>());
      q.canonicalize();
      return q;
    } else {
      return j.template get<double>();
    }
  }
  throw std::invalid_argument("expected a number or a rational string");
}

template <typename S>
Json scalar_vector_to_json(const std::vector<S>& v) {
  Json out = Json::array();
  for (const S& x : v) out.push_back(scalar_to_json(x));
  return out;
}

template <typename S>
std::vector<S> scalar_vector_from_json(const Json& j) {
  std::vector<S> out;
  for (const auto& x : j) out.push_back(scalar_from_json<S>(x));
  return out;
}

template <typename S>
Json matrix_to_json(const Matrix<S>& m) {
  Json out = Json::array();
  for (const auto& row : m) out.push_back(scalar_vector_to_json(row));
  return out;
}

template <typename S>
Matrix<S> matrix_from_json(const Json& j) {
  Matrix<S> out;
  for (const auto& row : j) out.push_back(scalar_vector_from_json<S>(row));
  return out;
}

template <typename S>
Json space_to_json(const FiniteSpace<S>& space) {
  return Json{{"weights", scalar_vector_to_json(space.weights())}};
}

template <typename S>
FiniteSpace<S> space_from_json(const Json& j) {
  return FiniteSpace<S>::from_weights(scalar_vector_from_json<S>(j.at("weights")));
}

inline Json partition_to_json(const Partition& p) {
  Json out = Json::array();
  for (const auto& block : p.blocks()) out.push_back(block);
  return out;
}

inline Partition partition_from_json(int n, const Json& j) {
  std::vector<std::vector<int>> blocks;
  for (const auto& block : j) blocks.push_back(block.get<std::vector<int>>());
  return Partition::from_blocks(n, std::move(blocks));
}

template <typename S>
Json kernel_to_json(const Polymorphism<S>& p) {
  return Json{{"weights", scalar_vector_to_json(p.space().weights())},
              {"nu", matrix_to_json(p.nu())}};
}

template <typename S>
Polymorphism<S> kernel_from_json(const Json& j) {
  auto space = FiniteSpace<S>::from_weights(scalar_vector_from_json<S>(j.at("weights")));
  return Polymorphism<S>::from_bistochastic(space, matrix_from_json<S>(j.at("nu")));
}

template <typename S>
Json operator_to_json(const MarkovMatrix<S>& v) {
  return Json{{"weights", scalar_vector_to_json(v.space().weights())},
              {"op", matrix_to_json(v.op())}};
}

template <typename S>
MarkovMatrix<S> operator_from_json(const Json& j) {
  auto space = FiniteSpace<S>::from_weights(scalar_vector_from_json<S>(j.at("weights")));
  return MarkovMatrix<S>(space, matrix_from_json<S>(j.at("op")));
}

template <typename S>
Json coupling_to_json(const CouplingMatrix<S>& c) {
  return Json{{"p", scalar_vector_to_json(c.p)}, {"q", matrix_to_json(c.q)}};
}

}  // namespace bistoch

#endif  // BISTOCH_JSON_IO_HPP
