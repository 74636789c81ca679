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

#ifndef DPVB_DATA_HPP_
#define DPVB_DATA_HPP_

#include <iosfwd>
#include <string>
#include <vector>

#include "dpvb/blr.hpp"
#include "dpvb/lda.hpp"
#include "dpvb/rng.hpp"
#include "dpvb/sbn.hpp"

namespace dpvb::data {

// UCI bag-of-words format: three header lines D, W, NNZ, then
// "docID wordID count" triples with 1-indexed ids.
lda::Corpus load_bow(std::istream& in);
lda::Corpus load_bow_file(const std::string& path);
void save_bow(const lda::Corpus& corpus, std::ostream& out);

std::vector<std::string> load_vocab_file(const std::string& path);

// LIBSVM-style lines "label idx:val ...", 1-indexed features. Labels may be
// {0,1} or {-1,+1}. Rows are scaled into the unit ball by one global factor
// when any row norm exceeds 1.
blr::BlrDataset load_libsvm(std::istream& in, int dim_hint = 0);
blr::BlrDataset load_libsvm_file(const std::string& path, int dim_hint = 0);
void save_libsvm(const blr::BlrDataset& data, std::ostream& out);

// Dense CSV of 0/1 values, one row per image.
sbn::SbnData load_binary_csv(std::istream& in);
sbn::SbnData load_binary_csv_file(const std::string& path);
void save_binary_csv(const sbn::SbnData& data, std::ostream& out);

// Copy of a corpus with every document truncated to the cap, using the
// truncation stream of the given seed.
lda::Corpus apply_doc_cap(const lda::Corpus& corpus, int cap,
                          std::uint64_t seed);

// Deterministic desk-scale generators.
lda::Corpus synth_corpus(int docs, int vocab, int topics, std::uint64_t seed);
blr::BlrDataset synth_blr(int n, int dim, double margin, std::uint64_t seed);
sbn::SbnData synth_bars(int pixels, int bars, int n, std::uint64_t seed);

}  // namespace dpvb::data

#endif  // DPVB_DATA_HPP_
