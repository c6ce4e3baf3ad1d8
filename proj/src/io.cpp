#include "fwtm/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <string_view>

namespace fwtm {
namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

bool is_blank(std::string_view line) { return split_ws(line).empty(); }

template <class T>
bool parse_number(std::string_view token, T& out) {
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), out);
  return ec == std::errc() && ptr == token.data() + token.size();
}

[[noreturn]] void fail_line(ErrorKind kind, std::size_t line_no, const std::string& what) {
  throw Error(kind, "line " + std::to_string(line_no) + ": " + what);
}

std::size_t header_value(std::istream& in, std::size_t& line_no, const char* name) {
  std::string line;
  if (!std::getline(in, line)) fail_line(ErrorKind::FormatError, line_no + 1, std::string("missing header ") + name);
  ++line_no;
  auto tokens = split_ws(line);
  std::size_t value = 0;
  if (tokens.size() != 1 || !parse_number(tokens[0], value))
    fail_line(ErrorKind::ParseError, line_no, std::string("expected integer ") + name);
  return value;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::InvalidArgument, "cannot open " + path.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::InvalidArgument, "cannot write " + path.string());
  return out;
}

std::vector<double> parse_reals(std::string_view line, std::size_t line_no) {
  std::vector<double> values;
  for (auto token : split_ws(line)) {
    double x = 0.0;
    if (!parse_number(token, x))
      fail_line(ErrorKind::ParseError, line_no, "not a number: '" + std::string(token) + "'");
    values.push_back(x);
  }
  return values;
}

}  // namespace

// ----------------------------------------------------------------- UCI bow

UciCorpus read_uci_bow(std::istream& docword, std::istream* vocab) {
  std::size_t line_no = 0;
  const std::size_t num_docs = header_value(docword, line_no, "D");
  const std::size_t num_words = header_value(docword, line_no, "W");
  const std::size_t num_entries = header_value(docword, line_no, "NNZ");
  if (num_words == 0) fail_line(ErrorKind::FormatError, 2, "vocabulary size W is 0");
  if (num_entries == 0) throw Error(ErrorKind::FormatError, "no documents");

  std::vector<std::vector<TermCount>> entries(num_docs);
  std::size_t seen = 0;
  std::string line;
  while (std::getline(docword, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    auto tokens = split_ws(line);
    std::size_t doc_id = 0, word_id = 0;
    double count = 0.0;
    if (tokens.size() != 3 || !parse_number(tokens[0], doc_id) ||
        !parse_number(tokens[1], word_id) || !parse_number(tokens[2], count))
      fail_line(ErrorKind::ParseError, line_no, "expected 'docID wordID count'");
    if (doc_id < 1 || doc_id > num_docs)
      fail_line(ErrorKind::BoundsError, line_no, "docID " + std::to_string(doc_id) + " outside 1.." + std::to_string(num_docs));
    if (word_id < 1 || word_id > num_words)
      fail_line(ErrorKind::BoundsError, line_no, "wordID " + std::to_string(word_id) + " outside 1.." + std::to_string(num_words));
    if (!(count > 0.0)) fail_line(ErrorKind::ParseError, line_no, "count must be positive");
    if (++seen > num_entries)
      fail_line(ErrorKind::FormatError, line_no, "more entries than NNZ = " + std::to_string(num_entries));
    entries[doc_id - 1].push_back({word_id - 1, count});
  }
  if (seen != num_entries)
    throw Error(ErrorKind::FormatError, "NNZ mismatch: header says " + std::to_string(num_entries) +
                                            ", found " + std::to_string(seen));

  std::vector<Document> docs;
  std::vector<std::size_t> ids;
  std::size_t dropped = 0;
  for (std::size_t d = 0; d < num_docs; ++d) {
    if (entries[d].empty()) {
      ++dropped;
      continue;
    }
    try {
      docs.emplace_back(std::move(entries[d]));
    } catch (const Error& e) {
      throw Error(ErrorKind::FormatError, "document " + std::to_string(d + 1) + ": " + e.what());
    }
    ids.push_back(d + 1);
  }

  Vocabulary vocabulary;
  if (vocab) {
    std::vector<std::string> terms;
    std::size_t vocab_line = 0;
    while (std::getline(*vocab, line)) {
      ++vocab_line;
      auto tokens = split_ws(line);
      if (tokens.empty()) continue;
      if (tokens.size() != 1)
        throw Error(ErrorKind::ParseError, "vocabulary line " + std::to_string(vocab_line) + ": expected one term");
      terms.emplace_back(tokens[0]);
    }
    if (terms.size() != num_words)
      throw Error(ErrorKind::FormatError, "vocabulary has " + std::to_string(terms.size()) +
                                              " terms, header W = " + std::to_string(num_words));
    vocabulary = Vocabulary(std::move(terms));
  } else {
    vocabulary = Vocabulary::anonymous(num_words);
  }
  return {Corpus(std::move(vocabulary), std::move(docs)), std::move(ids), dropped};
}

UciCorpus load_uci_bow(const std::filesystem::path& docword_path,
                       const std::filesystem::path& vocab_path) {
  auto docword = open_in(docword_path);
  if (vocab_path.empty()) return read_uci_bow(docword, nullptr);
  auto vocab = open_in(vocab_path);
  return read_uci_bow(docword, &vocab);
}

void write_uci_bow(std::ostream& out, const Corpus& corpus) {
  std::size_t nnz = 0;
  for (const auto& d : corpus.documents()) nnz += d.num_terms();
  const auto old_precision = out.precision(17);
  out << corpus.size() << '\n' << corpus.vocab_size() << '\n' << nnz << '\n';
  for (std::size_t d = 0; d < corpus.size(); ++d)
    for (const auto& e : corpus[d].entries()) out << d + 1 << ' ' << e.term + 1 << ' ' << e.count << '\n';
  out.precision(old_precision);
}

void write_vocab(std::ostream& out, const Vocabulary& vocab) {
  for (const auto& t : vocab.terms()) out << t << '\n';
}

// ------------------------------------------------------------------- model

void write_model(std::ostream& out, const ModelFile& model) {
  require_valid(model.beta);
  const auto old_precision = out.precision(17);
  out << "fwtm-model " << kModelFormatVersion << '\n'
      << "topics " << model.beta.num_topics() << '\n'
      << "terms " << model.beta.vocab_size() << '\n';
  for (const auto& [key, value] : model.metadata) {
    if (key.empty() || value.empty() || key.find_first_of(" \t\r\n") != std::string::npos ||
        value.find_first_of(" \t\r\n") != std::string::npos)
      throw Error(ErrorKind::InvalidArgument, "metadata key/value contains whitespace: " + key);
    out << "meta " << key << ' ' << value << '\n';
  }
  for (std::size_t k = 0; k < model.beta.num_topics(); ++k) {
    const auto row = model.beta.row(k);
    for (std::size_t j = 0; j < row.size(); ++j) out << (j ? " " : "") << row[j];
    out << '\n';
  }
  out.precision(old_precision);
}

ModelFile read_model(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&](const std::string& what) {
    while (std::getline(in, line)) {
      ++line_no;
      if (!is_blank(line)) return;
    }
    throw Error(ErrorKind::ParseError, "unexpected end of model file: missing " + what);
  };

  next_line("header");
  auto tokens = split_ws(line);
  int version = 0;
  if (tokens.size() != 2 || tokens[0] != "fwtm-model" || !parse_number(tokens[1], version))
    fail_line(ErrorKind::ParseError, line_no, "expected 'fwtm-model <version>'");
  if (version != kModelFormatVersion)
    throw Error(ErrorKind::UnsupportedVersion, "model format version " + std::to_string(version) +
                                                   " (supported: " + std::to_string(kModelFormatVersion) + ")");

  auto keyed_size = [&](const char* key) {
    next_line(key);
    auto t = split_ws(line);
    std::size_t value = 0;
    if (t.size() != 2 || t[0] != key || !parse_number(t[1], value) || value == 0)
      fail_line(ErrorKind::ParseError, line_no, std::string("expected '") + key + " <positive integer>'");
    return value;
  };
  const std::size_t k_count = keyed_size("topics");
  const std::size_t v_count = keyed_size("terms");

  ModelFile model;
  std::vector<double> values;
  values.reserve(k_count * v_count);
  next_line("row 0");
  for (tokens = split_ws(line); !tokens.empty() && tokens[0] == "meta"; tokens = split_ws(line)) {
    if (tokens.size() != 3) fail_line(ErrorKind::ParseError, line_no, "expected 'meta <key> <value>'");
    model.metadata[std::string(tokens[1])] = std::string(tokens[2]);
    next_line("row 0");
  }
  for (std::size_t k = 0; k < k_count; ++k) {
    if (k > 0) next_line("row " + std::to_string(k));
    auto row = parse_reals(line, line_no);
    if (row.size() != v_count)
      fail_line(ErrorKind::ParseError, line_no, "row " + std::to_string(k) + " has " + std::to_string(row.size()) +
                                                    " entries, expected " + std::to_string(v_count));
    values.insert(values.end(), row.begin(), row.end());
  }
  model.beta = TopicMatrix::unchecked(k_count, v_count, std::move(values));
  require_valid(model.beta);
  return model;
}

void save_model(const std::filesystem::path& path, const ModelFile& model) {
  auto out = open_out(path);
  write_model(out, model);
  if (!out) throw Error(ErrorKind::InvalidArgument, "write failed: " + path.string());
}

ModelFile load_model(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_model(in);
}

// --------------------------------------------------------------- CTM prior

CtmPrior read_ctm_prior(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    rows.push_back(parse_reals(line, line_no));
  }
  if (rows.empty()) throw Error(ErrorKind::ParseError, "prior file is empty");
  const std::size_t k_count = rows.front().size();
  if (rows.size() != k_count && rows.size() != k_count + 1)
    throw Error(ErrorKind::FormatError, "prior file needs " + std::to_string(k_count) + " or " +
                                            std::to_string(k_count + 1) + " rows, found " +
                                            std::to_string(rows.size()));
  Eigen::MatrixXd precision(k_count, k_count);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != k_count)
      throw Error(ErrorKind::FormatError, "prior row " + std::to_string(i) + " has " +
                                              std::to_string(rows[i].size()) + " values");
    if (i < k_count)
      for (std::size_t j = 0; j < k_count; ++j) precision(Eigen::Index(i), Eigen::Index(j)) = rows[i][j];
  }
  std::optional<Eigen::VectorXd> mean;
  if (rows.size() == k_count + 1)
    mean = Eigen::Map<const Eigen::VectorXd>(rows.back().data(), Eigen::Index(k_count));
  return CtmPrior(std::move(precision), std::move(mean));
}

CtmPrior load_ctm_prior(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_ctm_prior(in);
}

// ------------------------------------------------------------------- theta

void write_theta(std::ostream& out, std::span<const std::size_t> doc_ids,
                 std::span<const TopicProportion> thetas) {
  if (doc_ids.size() != thetas.size())
    throw Error(ErrorKind::InvalidArgument, "need one document id per topic proportion");
  const auto old_precision = out.precision(17);
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    out << doc_ids[i];
    for (const auto& e : thetas[i].entries()) out << ' ' << e.topic << ':' << e.weight;
    out << '\n';
  }
  out.precision(old_precision);
}

}  // namespace fwtm
