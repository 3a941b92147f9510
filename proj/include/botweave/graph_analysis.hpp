#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <span>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "botweave/data_model.hpp"

namespace botweave {

using IdSet = std::unordered_set<UserId>;

struct LinkComposition {
  std::uint64_t incoming_total = 0;        // edges ending at a botnet member
  std::uint64_t incoming_from_botnet = 0;  // ... whose follower is also a member
  std::uint64_t outgoing_total = 0;        // edges starting at a botnet member
  std::uint64_t outgoing_to_botnet = 0;    // ... whose friend is also a member
  std::uint64_t distinct_followers = 0;    // distinct accounts following any member
  std::uint64_t distinct_friends = 0;      // distinct accounts followed by any member

  double incoming_fraction() const {
    return incoming_total ? static_cast<double>(incoming_from_botnet) / static_cast<double>(incoming_total) : 0.0;
  }
  double outgoing_fraction() const {
    return outgoing_total ? static_cast<double>(outgoing_to_botnet) / static_cast<double>(outgoing_total) : 0.0;
  }
  friend bool operator==(const LinkComposition&, const LinkComposition&) = default;
};

inline LinkComposition link_composition(const FollowGraph& g, const IdSet& botnet) {
  LinkComposition c;
  IdSet followers, friends;
  for (const FollowEdge& e : g.edges) {
    const bool src = botnet.contains(e.follower);
    const bool dst = botnet.contains(e.friend_id);
    if (dst) {
      ++c.incoming_total;
      if (src) ++c.incoming_from_botnet;
      followers.insert(e.follower);
    }
    if (src) {
      ++c.outgoing_total;
      if (dst) ++c.outgoing_to_botnet;
      friends.insert(e.friend_id);
    }
  }
  c.distinct_followers = followers.size();
  c.distinct_friends = friends.size();
  return c;
}

/// Degree -> number of population members with that degree.
struct DegreeHistograms {
  std::map<std::uint64_t, std::uint64_t> in;
  std::map<std::uint64_t, std::uint64_t> out;

  std::uint64_t max_in() const { return in.empty() ? 0 : in.rbegin()->first; }
  std::uint64_t max_out() const { return out.empty() ? 0 : out.rbegin()->first; }
};

inline DegreeHistograms degree_distributions(const FollowGraph& g, std::span<const UserId> population) {
  std::unordered_map<UserId, std::pair<std::uint64_t, std::uint64_t>> deg;
  deg.reserve(population.size());
  for (UserId id : population) deg.emplace(id, std::pair<std::uint64_t, std::uint64_t>{0, 0});
  for (const FollowEdge& e : g.edges) {
    if (auto it = deg.find(e.friend_id); it != deg.end()) ++it->second.first;
    if (auto it = deg.find(e.follower); it != deg.end()) ++it->second.second;
  }
  DegreeHistograms h;
  for (const auto& [id, d] : deg) {
    h.in[d.first] += 1;
    h.out[d.second] += 1;
  }
  return h;
}

struct FollowedAccount {
  UserId id = 0;
  std::uint64_t bot_followers = 0;
  friend bool operator==(const FollowedAccount&, const FollowedAccount&) = default;
};

/// Accounts outside the botnet ranked by how many members follow them.
inline std::vector<FollowedAccount> top_external_followed(const FollowGraph& g, const IdSet& botnet,
                                                          std::size_t top_n) {
  std::unordered_map<UserId, std::uint64_t> counts;
  for (const FollowEdge& e : g.edges)
    if (botnet.contains(e.follower) && !botnet.contains(e.friend_id)) ++counts[e.friend_id];
  std::vector<FollowedAccount> v;
  v.reserve(counts.size());
  for (const auto& [id, n] : counts) v.push_back({id, n});
  std::sort(v.begin(), v.end(), [](const FollowedAccount& a, const FollowedAccount& b) {
    if (a.bot_followers != b.bot_followers) return a.bot_followers > b.bot_followers;
    return a.id < b.id;
  });
  if (v.size() > top_n) v.resize(top_n);
  return v;
}

}  // namespace botweave
