#include "clsrec/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "clsrec/io_util.hpp"

namespace clsrec {

namespace {

constexpr char kMagic[4] = {'C', 'L', 'S', 'D'};
constexpr std::uint32_t kVersion = 1;

struct RawPair {
  std::int64_t a;
  std::int64_t b;
};

std::vector<std::string> tokenize(const std::string& line) {
  std::string norm = line;
  for (char& c : norm)
    if (c == ',' || c == '\t' || c == '\r') c = ' ';
  std::vector<std::string> toks;
  std::istringstream is(norm);
  std::string tok;
  while (is >> tok) toks.push_back(tok);
  return toks;
}

bool parse_i64(const std::string& s, std::int64_t& out) {
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && p == s.data() + s.size();
}

bool parse_real(const std::string& s, Real& out) {
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && p == s.data() + s.size();
}

// Reads whitespace/comma-separated integer rows; a non-numeric first line is
// treated as a header. `min_cols` columns are required per data row.
template <typename RowFn>
void read_rows(const std::string& path, std::size_t min_cols, RowFn&& fn) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Data, "missing input file: " + path);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto toks = tokenize(line);
    if (toks.empty()) continue;
    std::int64_t probe;
    if (lineno == 1 && !parse_i64(toks[0], probe)) continue;  // header
    if (toks.size() < min_cols)
      throw Error(ErrorKind::Data,
                  path + ":" + std::to_string(lineno) + ": expected at least " +
                      std::to_string(min_cols) + " columns, got " + std::to_string(toks.size()));
    fn(toks, lineno);
  }
}

std::int64_t field_i64(const std::string& path, std::size_t lineno, const std::string& tok) {
  std::int64_t v;
  if (!parse_i64(tok, v))
    throw Error(ErrorKind::Data,
                path + ":" + std::to_string(lineno) + ": non-integer field '" + tok + "'");
  return v;
}

Dataset assemble(std::vector<RawPair> interactions, std::vector<RawPair> friendships,
                 std::uint64_t split_seed) {
  std::set<std::int64_t> user_ids, item_ids;
  for (const RawPair& p : interactions) {
    user_ids.insert(p.a);
    item_ids.insert(p.b);
  }
  for (const RawPair& p : friendships) {
    user_ids.insert(p.a);
    user_ids.insert(p.b);
  }

  Dataset ds;
  ds.user_raw_ids.assign(user_ids.begin(), user_ids.end());
  ds.item_raw_ids.assign(item_ids.begin(), item_ids.end());
  ds.num_users = static_cast<std::int64_t>(ds.user_raw_ids.size());
  ds.num_items = static_cast<std::int64_t>(ds.item_raw_ids.size());

  std::map<std::int64_t, std::uint32_t> user_map, item_map;
  for (std::uint32_t i = 0; i < ds.user_raw_ids.size(); ++i) user_map[ds.user_raw_ids[i]] = i;
  for (std::uint32_t i = 0; i < ds.item_raw_ids.size(); ++i) item_map[ds.item_raw_ids[i]] = i;

  std::set<IdPair> pair_set;
  for (const RawPair& p : interactions) pair_set.insert({user_map[p.a], item_map[p.b]});
  std::vector<IdPair> pairs(pair_set.begin(), pair_set.end());

  std::set<IdPair> edge_set;
  for (const RawPair& p : friendships) {
    if (p.a == p.b) continue;  // self-loops dropped
    std::uint32_t u = user_map[p.a], v = user_map[p.b];
    edge_set.insert({std::min(u, v), std::max(u, v)});
  }
  ds.social_edges.assign(edge_set.begin(), edge_set.end());

  split_interactions(ds, std::move(pairs), split_seed);
  validate_dataset(ds);
  return ds;
}

}  // namespace

Split parse_split(const std::string& name) {
  if (name == "train") return Split::Train;
  if (name == "val") return Split::Val;
  if (name == "test") return Split::Test;
  throw Error(ErrorKind::Usage, "unknown split '" + name + "' (expected train|val|test)");
}

const char* split_name(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Val: return "val";
    default: return "test";
  }
}

Dataset load_lastfm(const std::string& dir, std::uint64_t split_seed) {
  namespace fs = std::filesystem;
  const std::string interactions_path = (fs::path(dir) / "user_artists.dat").string();
  const std::string friends_path = (fs::path(dir) / "user_friends.dat").string();

  std::vector<RawPair> interactions, friendships;
  read_rows(interactions_path, 2, [&](const std::vector<std::string>& t, std::size_t ln) {
    interactions.push_back({field_i64(interactions_path, ln, t[0]),
                            field_i64(interactions_path, ln, t[1])});
  });
  read_rows(friends_path, 2, [&](const std::vector<std::string>& t, std::size_t ln) {
    friendships.push_back({field_i64(friends_path, ln, t[0]), field_i64(friends_path, ln, t[1])});
  });
  return assemble(std::move(interactions), std::move(friendships), split_seed);
}

Dataset load_ciao(const std::string& dir, std::uint64_t split_seed, Real positive_threshold) {
  namespace fs = std::filesystem;
  const std::string ratings_path = (fs::path(dir) / "ratings.txt").string();
  const std::string trust_path = (fs::path(dir) / "trust.txt").string();

  std::vector<RawPair> interactions, friendships;
  read_rows(ratings_path, 3, [&](const std::vector<std::string>& t, std::size_t ln) {
    Real rating;
    if (!parse_real(t.back(), rating))
      throw Error(ErrorKind::Data, ratings_path + ":" + std::to_string(ln) +
                                       ": non-numeric rating '" + t.back() + "'");
    if (rating >= positive_threshold)
      interactions.push_back({field_i64(ratings_path, ln, t[0]), field_i64(ratings_path, ln, t[1])});
  });
  read_rows(trust_path, 2, [&](const std::vector<std::string>& t, std::size_t ln) {
    friendships.push_back({field_i64(trust_path, ln, t[0]), field_i64(trust_path, ln, t[1])});
  });
  return assemble(std::move(interactions), std::move(friendships), split_seed);
}

void split_interactions(Dataset& ds, std::vector<IdPair> pairs, std::uint64_t seed) {
  if (pairs.empty()) throw Error(ErrorKind::Data, "split: no interactions");

  auto shuffle = [](std::vector<IdPair>& v, std::uint64_t s) {
    Rng rng(s);
    for (std::size_t i = v.size() - 1; i > 0; --i)
      std::swap(v[i], v[rng.below(i + 1)]);
  };

  shuffle(pairs, derive_seed(seed, 0xA11));
  const std::size_t n = pairs.size();
  const std::size_t n_prov = n * 8 / 10;

  std::vector<IdPair> prov(pairs.begin(), pairs.begin() + static_cast<std::ptrdiff_t>(n_prov));
  ds.test.assign(pairs.begin() + static_cast<std::ptrdiff_t>(n_prov), pairs.end());

  shuffle(prov, derive_seed(seed, 0xA12));
  const std::size_t n_val = prov.size() / 10;
  ds.val.assign(prov.begin(), prov.begin() + static_cast<std::ptrdiff_t>(n_val));
  ds.train.assign(prov.begin() + static_cast<std::ptrdiff_t>(n_val), prov.end());
}

void validate_dataset(const Dataset& ds) {
  std::vector<std::string> problems;
  auto key = [](const IdPair& p) {
    return (static_cast<std::uint64_t>(p.first) << 32) | p.second;
  };
  std::unordered_set<std::uint64_t> seen;
  for (Split s : {Split::Train, Split::Val, Split::Test}) {
    for (const IdPair& p : ds.split(s)) {
      if (p.first >= ds.num_users || p.second >= ds.num_items)
        problems.push_back(std::string(split_name(s)) + " pair (" + std::to_string(p.first) +
                           "," + std::to_string(p.second) + ") out of range");
      if (!seen.insert(key(p)).second)
        problems.push_back("duplicate interaction (" + std::to_string(p.first) + "," +
                           std::to_string(p.second) + ")");
      if (problems.size() > 8) break;
    }
  }
  std::set<IdPair> edges;
  for (const IdPair& e : ds.social_edges) {
    if (e.first >= e.second)
      problems.push_back("social edge (" + std::to_string(e.first) + "," +
                         std::to_string(e.second) + ") not canonical");
    else if (e.second >= ds.num_users)
      problems.push_back("social edge (" + std::to_string(e.first) + "," +
                         std::to_string(e.second) + ") out of range");
    else if (!edges.insert(e).second)
      problems.push_back("duplicate social edge (" + std::to_string(e.first) + "," +
                         std::to_string(e.second) + ")");
    if (problems.size() > 8) break;
  }
  if (!problems.empty()) {
    std::string msg = "dataset validation failed:";
    for (const std::string& p : problems) msg += "\n  " + p;
    throw Error(ErrorKind::Data, msg);
  }
}

SpMat Dataset::train_matrix() const {
  std::vector<Eigen::Triplet<Real>> tri;
  tri.reserve(train.size());
  for (const IdPair& p : train)
    tri.emplace_back(static_cast<int>(p.first), static_cast<int>(p.second), 1.0);
  SpMat m(num_users, num_items);
  m.setFromTriplets(tri.begin(), tri.end());
  return m;
}

SpMat Dataset::social_matrix() const {
  std::vector<Eigen::Triplet<Real>> tri;
  tri.reserve(social_edges.size() * 2);
  for (const IdPair& e : social_edges) {
    tri.emplace_back(static_cast<int>(e.first), static_cast<int>(e.second), 1.0);
    tri.emplace_back(static_cast<int>(e.second), static_cast<int>(e.first), 1.0);
  }
  SpMat m(num_users, num_users);
  m.setFromTriplets(tri.begin(), tri.end());
  return m;
}

std::vector<std::vector<std::uint32_t>> Dataset::items_by_user(Split s) const {
  std::vector<std::vector<std::uint32_t>> out(static_cast<std::size_t>(num_users));
  for (const IdPair& p : split(s)) out[p.first].push_back(p.second);
  for (auto& v : out) std::sort(v.begin(), v.end());
  return out;
}

std::vector<std::int64_t> Dataset::train_degrees() const {
  std::vector<std::int64_t> deg(static_cast<std::size_t>(num_users), 0);
  for (const IdPair& p : train) ++deg[p.first];
  return deg;
}

std::vector<std::int64_t> Dataset::social_degrees() const {
  std::vector<std::int64_t> deg(static_cast<std::size_t>(num_users), 0);
  for (const IdPair& e : social_edges) {
    ++deg[e.first];
    ++deg[e.second];
  }
  return deg;
}

std::string Dataset::fingerprint() const {
  io::Fnv1a h;
  h.update("CLSD1", 5);
  h.u64(static_cast<std::uint64_t>(num_users));
  h.u64(static_cast<std::uint64_t>(num_items));
  for (std::int64_t v : user_raw_ids) h.u64(static_cast<std::uint64_t>(v));
  for (std::int64_t v : item_raw_ids) h.u64(static_cast<std::uint64_t>(v));
  for (Split s : {Split::Train, Split::Val, Split::Test}) {
    const auto& pairs = split(s);
    h.u64(pairs.size());
    for (const IdPair& p : pairs) h.u64((static_cast<std::uint64_t>(p.first) << 32) | p.second);
  }
  h.u64(social_edges.size());
  for (const IdPair& e : social_edges) h.u64((static_cast<std::uint64_t>(e.first) << 32) | e.second);
  return h.hex();
}

namespace {

void write_pairs(io::Writer& w, const std::vector<IdPair>& pairs) {
  w.u64(pairs.size());
  for (const IdPair& p : pairs) {
    w.u32(p.first);
    w.u32(p.second);
  }
}

std::vector<IdPair> read_pairs(io::Reader& r) {
  std::uint64_t n = r.u64();
  std::vector<IdPair> pairs(n);
  for (auto& p : pairs) {
    p.first = r.u32();
    p.second = r.u32();
  }
  return pairs;
}

}  // namespace

void save_dataset(const Dataset& ds, const std::string& path) {
  io::Writer w;
  w.bytes(kMagic, 4);
  w.u32(kVersion);
  w.u64(static_cast<std::uint64_t>(ds.num_users));
  w.u64(static_cast<std::uint64_t>(ds.num_items));
  w.u64(ds.user_raw_ids.size());
  for (std::int64_t v : ds.user_raw_ids) w.i64(v);
  w.u64(ds.item_raw_ids.size());
  for (std::int64_t v : ds.item_raw_ids) w.i64(v);
  write_pairs(w, ds.train);
  write_pairs(w, ds.val);
  write_pairs(w, ds.test);
  write_pairs(w, ds.social_edges);
  w.str(ds.fingerprint());
  w.save(path);
}

Dataset load_dataset(const std::string& path) {
  io::Reader r = io::Reader::from_file(path);
  char magic[4];
  r.raw(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0)
    throw Error(ErrorKind::Data, path + ": bad magic bytes (not a dataset cache)");
  std::uint32_t version = r.u32();
  if (version != kVersion)
    throw Error(ErrorKind::Data,
                path + ": unsupported dataset version " + std::to_string(version));
  Dataset ds;
  ds.num_users = static_cast<std::int64_t>(r.u64());
  ds.num_items = static_cast<std::int64_t>(r.u64());
  ds.user_raw_ids.resize(r.u64());
  for (auto& v : ds.user_raw_ids) v = r.i64();
  ds.item_raw_ids.resize(r.u64());
  for (auto& v : ds.item_raw_ids) v = r.i64();
  ds.train = read_pairs(r);
  ds.val = read_pairs(r);
  ds.test = read_pairs(r);
  ds.social_edges = read_pairs(r);
  std::string stored = r.str();
  if (stored != ds.fingerprint())
    throw Error(ErrorKind::Data, path + ": fingerprint mismatch (file corrupted?)");
  validate_dataset(ds);
  return ds;
}

std::string dataset_summary_json(const Dataset& ds) {
  nlohmann::json j;
  j["users"] = ds.num_users;
  j["items"] = ds.num_items;
  j["interactions"] = ds.num_interactions();
  j["social_edges"] = ds.social_edges.size();
  j["split_sizes"] = {{"train", ds.train.size()}, {"val", ds.val.size()}, {"test", ds.test.size()}};
  j["fingerprint"] = ds.fingerprint();
  return j.dump(2);
}

}  // namespace clsrec
