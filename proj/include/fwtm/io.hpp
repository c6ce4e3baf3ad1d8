#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "fwtm/core_model.hpp"
#include "fwtm/objectives.hpp"

namespace fwtm {

inline constexpr int kModelFormatVersion = 1;

struct UciCorpus {
  Corpus corpus;
  /// 1-based document id from the input file, one per corpus document.
  std::vector<std::size_t> doc_ids;
  /// Documents declared in the header that had no entries.
  std::size_t dropped_empty = 0;
};

/// UCI bag-of-words: three header lines (D, W, NNZ) then NNZ lines
/// "docID wordID count" with 1-based ids. `vocab` holds W terms, one per
/// line; pass nullptr to use placeholder terms.
UciCorpus read_uci_bow(std::istream& docword, std::istream* vocab);
UciCorpus load_uci_bow(const std::filesystem::path& docword_path,
                       const std::filesystem::path& vocab_path = {});

void write_uci_bow(std::ostream& out, const Corpus& corpus);
void write_vocab(std::ostream& out, const Vocabulary& vocab);

struct ModelFile {
  TopicMatrix beta;
  std::map<std::string, std::string> metadata;
};

/// Text format:
///   fwtm-model <version>
///   topics <K>
///   terms <V>
///   meta <key> <value>      (zero or more)
///   <V reals>               (K rows, 17 significant digits)
void write_model(std::ostream& out, const ModelFile& model);
ModelFile read_model(std::istream& in);
void save_model(const std::filesystem::path& path, const ModelFile& model);
ModelFile load_model(const std::filesystem::path& path);

/// K lines of K reals (the precision matrix), optionally followed by one
/// line of K reals (the mean).
CtmPrior read_ctm_prior(std::istream& in);
CtmPrior load_ctm_prior(const std::filesystem::path& path);

/// One line per document: "<docID> <k>:<w> <k>:<w> ..." with 0-based topic
/// ids and 17 significant digits.
void write_theta(std::ostream& out, std::span<const std::size_t> doc_ids,
                 std::span<const TopicProportion> thetas);

}  // namespace fwtm
