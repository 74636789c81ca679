// Copyright 2026 The dpvb Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dpvb/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "dpvb/errors.hpp"

namespace dpvb::data {
namespace {

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw parse_error("cannot open '" + path + "'", 0);
  return in;
}

// Marsaglia-Tsang gamma draw (shape < 1 via the boost trick).
double gamma_draw(double shape, Rng& rng) {
  if (shape < 1.0) {
    const double u = rng.uniform();
    return gamma_draw(shape + 1.0, rng) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  while (true) {
    double x, v;
    do {
      x = rng.gaussian();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u + 1e-300) < 0.5 * x * x + d * (1.0 - v + std::log(v)))
      return d * v;
  }
}

std::vector<double> dirichlet_draw(const std::vector<double>& conc,
                                   Rng& rng) {
  std::vector<double> out(conc.size());
  double total = 0.0;
  for (std::size_t i = 0; i < conc.size(); ++i) {
    out[i] = gamma_draw(conc[i], rng);
    total += out[i];
  }
  for (double& v : out) v /= total;
  return out;
}

std::size_t categorical_draw(const std::vector<double>& probs, Rng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return i;
  }
  return probs.size() - 1;
}

}  // namespace

lda::Corpus load_bow(std::istream& in) {
  std::string line;
  long header[3];
  int line_no = 0;
  for (int h = 0; h < 3; ++h) {
    if (!std::getline(in, line))
      throw parse_error("bag-of-words: missing header", line_no + 1);
    ++line_no;
    std::istringstream ss(line);
    if (!(ss >> header[h]) || header[h] < 0)
      throw parse_error("bag-of-words: bad header value", line_no);
  }
  const long docs = header[0], vocab = header[1], nnz = header[2];
  if (vocab < 1) throw parse_error("bag-of-words: empty vocabulary", 2);

  std::vector<std::map<int, int>> counts(docs);
  long seen = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ss(line);
    long doc_id, word_id, count;
    if (!(ss >> doc_id >> word_id >> count))
      throw parse_error("bag-of-words: expected 'docID wordID count'",
                        line_no);
    if (doc_id < 1 || doc_id > docs)
      throw parse_error("bag-of-words: docID out of range", line_no);
    if (word_id < 1 || word_id > vocab)
      throw parse_error("bag-of-words: wordID out of range", line_no);
    if (count < 1) throw parse_error("bag-of-words: count must be >= 1",
                                     line_no);
    counts[doc_id - 1][static_cast<int>(word_id) - 1] +=
        static_cast<int>(count);
    ++seen;
  }
  if (seen != nnz)
    throw parse_error("bag-of-words: NNZ header does not match triples",
                      line_no);

  lda::Corpus corpus(static_cast<int>(vocab));
  for (const auto& doc_counts : counts) {
    lda::Doc doc;
    for (const auto& [id, c] : doc_counts) doc.words.emplace_back(id, c);
    corpus.add_doc(std::move(doc));
  }
  return corpus;
}

lda::Corpus load_bow_file(const std::string& path) {
  auto in = open_or_throw(path);
  return load_bow(in);
}

void save_bow(const lda::Corpus& corpus, std::ostream& out) {
  long nnz = 0;
  for (std::size_t d = 0; d < corpus.size(); ++d)
    nnz += static_cast<long>(corpus.doc(d).words.size());
  out << corpus.size() << '\n' << corpus.vocab_size() << '\n' << nnz << '\n';
  for (std::size_t d = 0; d < corpus.size(); ++d)
    for (const auto& [id, c] : corpus.doc(d).words)
      out << (d + 1) << ' ' << (id + 1) << ' ' << c << '\n';
}

std::vector<std::string> load_vocab_file(const std::string& path) {
  auto in = open_or_throw(path);
  std::vector<std::string> vocab;
  std::string line;
  while (std::getline(in, line)) vocab.push_back(line);
  return vocab;
}

blr::BlrDataset load_libsvm(std::istream& in, int dim_hint) {
  std::vector<std::vector<std::pair<int, double>>> rows;
  std::vector<double> labels;
  int dim = dim_hint;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ss(line);
    double label;
    if (!(ss >> label))
      throw parse_error("libsvm: missing label", line_no);
    if (label == -1.0) label = 0.0;
    if (label != 0.0 && label != 1.0)
      throw parse_error("libsvm: label must be in {0,1} or {-1,+1}", line_no);
    std::vector<std::pair<int, double>> row;
    std::string token;
    while (ss >> token) {
      const auto colon = token.find(':');
      if (colon == std::string::npos)
        throw parse_error("libsvm: expected idx:val", line_no);
      int idx;
      double val;
      try {
        idx = std::stoi(token.substr(0, colon));
        val = std::stod(token.substr(colon + 1));
      } catch (const std::exception&) {
        throw parse_error("libsvm: malformed idx:val", line_no);
      }
      if (idx < 1) throw parse_error("libsvm: indices are 1-based", line_no);
      for (const auto& [prev, unused] : row)
        if (prev == idx - 1)
          throw parse_error("libsvm: duplicate index in row", line_no);
      row.emplace_back(idx - 1, val);
      dim = std::max(dim, idx);
    }
    rows.push_back(std::move(row));
    labels.push_back(label);
  }
  if (rows.empty()) throw parse_error("libsvm: no rows", line_no);

  Eigen::MatrixXd inputs =
      Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows.size()), dim);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (const auto& [idx, val] : rows[i])
      inputs(static_cast<Eigen::Index>(i), idx) = val;

  double max_norm = 0.0;
  for (Eigen::Index i = 0; i < inputs.rows(); ++i)
    max_norm = std::max(max_norm, inputs.row(i).norm());
  double scale = 1.0;
  if (max_norm > 1.0) {
    scale = max_norm;
    inputs /= scale;
  }
  Eigen::VectorXd y(static_cast<Eigen::Index>(labels.size()));
  for (std::size_t i = 0; i < labels.size(); ++i)
    y[static_cast<Eigen::Index>(i)] = labels[i];
  return {inputs, y, scale};
}

blr::BlrDataset load_libsvm_file(const std::string& path, int dim_hint) {
  auto in = open_or_throw(path);
  return load_libsvm(in, dim_hint);
}

void save_libsvm(const blr::BlrDataset& data, std::ostream& out) {
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    out << static_cast<int>(data.label(i));
    const Eigen::VectorXd row = data.input(i);
    for (Eigen::Index j = 0; j < row.size(); ++j)
      if (row[j] != 0.0) out << ' ' << (j + 1) << ':' << row[j];
    out << '\n';
  }
}

sbn::SbnData load_binary_csv(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      if (cell == "0")
        row.push_back(0.0);
      else if (cell == "1")
        row.push_back(1.0);
      else
        throw parse_error("binary csv: cells must be 0 or 1", line_no);
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw parse_error("binary csv: ragged rows", line_no);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw parse_error("binary csv: no rows", line_no);
  Eigen::MatrixXd y(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      y(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          rows[i][j];
  return sbn::SbnData(y);
}

sbn::SbnData load_binary_csv_file(const std::string& path) {
  auto in = open_or_throw(path);
  return load_binary_csv(in);
}

void save_binary_csv(const sbn::SbnData& data, std::ostream& out) {
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    const Eigen::VectorXd row = data.row(i);
    for (Eigen::Index j = 0; j < row.size(); ++j) {
      if (j) out << ',';
      out << static_cast<int>(row[j]);
    }
    out << '\n';
  }
}

lda::Corpus apply_doc_cap(const lda::Corpus& corpus, int cap,
                          std::uint64_t seed) {
  if (cap <= 0) return corpus;
  Rng truncation = Rng(seed).child("truncation");
  lda::Corpus out(corpus.vocab_size(), cap);
  for (std::size_t d = 0; d < corpus.size(); ++d)
    out.add_doc(lda::truncate_doc(corpus.doc(d), cap, truncation));
  return out;
}

lda::Corpus synth_corpus(int docs, int vocab, int topics,
                         std::uint64_t seed) {
  if (docs < 1 || vocab < 1 || topics < 1)
    throw std::domain_error("synth_corpus: sizes must be positive");
  Rng rng = Rng(seed).child("synth");
  // Planted topics: topic k weights words congruent to k mod K.
  std::vector<std::vector<double>> beta(topics,
                                        std::vector<double>(vocab, 1.0));
  for (int k = 0; k < topics; ++k) {
    double total = 0.0;
    for (int v = 0; v < vocab; ++v) {
      if (v % topics == k) beta[k][v] += 9.0;
      total += beta[k][v];
    }
    for (double& w : beta[k]) w /= total;
  }
  const std::vector<double> alpha(topics, 0.3);
  lda::Corpus corpus(vocab);
  for (int d = 0; d < docs; ++d) {
    const auto theta = dirichlet_draw(alpha, rng);
    const int len = 20 + static_cast<int>(rng.uniform_index(21));
    std::vector<int> counts(vocab, 0);
    for (int i = 0; i < len; ++i) {
      const std::size_t k = categorical_draw(theta, rng);
      counts[categorical_draw(beta[k], rng)]++;
    }
    lda::Doc doc;
    for (int v = 0; v < vocab; ++v)
      if (counts[v]) doc.words.emplace_back(v, counts[v]);
    corpus.add_doc(std::move(doc));
  }
  return corpus;
}

blr::BlrDataset synth_blr(int n, int dim, double margin, std::uint64_t seed) {
  if (n < 1 || dim < 1 || margin < 0.0)
    throw std::domain_error("synth_blr: invalid arguments");
  Rng rng = Rng(seed).child("synth");
  Eigen::VectorXd w(dim);
  for (int i = 0; i < dim; ++i) w[i] = rng.gaussian();
  w /= w.norm();

  Eigen::MatrixXd inputs(n, dim);
  Eigen::VectorXd labels(n);
  const double gap = margin / 4.0;
  int filled = 0;
  while (filled < n) {
    Eigen::VectorXd x(dim);
    for (int i = 0; i < dim; ++i) x[i] = rng.gaussian();
    x /= x.norm();
    x *= std::pow(rng.uniform(), 1.0 / dim);
    const double score = w.dot(x);
    if (std::abs(score) < gap) continue;
    inputs.row(filled) = x;
    labels[filled] = score > 0.0 ? 1.0 : 0.0;
    ++filled;
  }
  return {inputs, labels};
}

sbn::SbnData synth_bars(int pixels, int bars, int n, std::uint64_t seed) {
  const int g = static_cast<int>(std::lround(std::sqrt(pixels)));
  if (g * g != pixels)
    throw std::domain_error("synth_bars: pixel count must be a square");
  if (bars < 1 || bars > 2 * g || n < 1)
    throw std::domain_error("synth_bars: invalid bar or image count");
  Rng rng = Rng(seed).child("synth");
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(n, pixels);
  for (int i = 0; i < n; ++i) {
    for (int bar = 0; bar < bars; ++bar) {
      if (rng.uniform() >= 0.5) continue;
      const int line = bar / 2;
      if (bar % 2 == 0) {
        for (int c = 0; c < g; ++c) y(i, line * g + c) = 1.0;
      } else {
        for (int r = 0; r < g; ++r) y(i, r * g + line) = 1.0;
      }
    }
    for (int j = 0; j < pixels; ++j)
      if (rng.uniform() < 0.05) y(i, j) = 1.0 - y(i, j);
  }
  return sbn::SbnData(y);
}

}  // namespace dpvb::data
