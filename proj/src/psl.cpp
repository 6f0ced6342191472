// Copyright (c) httpsrr contributors. All rights reserved.
// Licensed under the Apache 2.0 License.

#include "httpsrr/psl.hpp"

#include <algorithm>
#include <string_view>
#include <unordered_set>

namespace httpsrr
{
  namespace
  {
    constexpr std::string_view rule_list[] = {
#include "psl_rules.inc"
    };

    struct Rules
    {
      std::unordered_set<std::string_view> exact;
      std::unordered_set<std::string_view> wildcard; // parent of "*.x"
      std::unordered_set<std::string_view> exception;
    };

    const Rules& rules()
    {
      static const Rules r = [] {
        Rules out;
        for (auto rule : rule_list)
        {
          if (rule.starts_with("!"))
            out.exception.insert(rule.substr(1));
          else if (rule.starts_with("*."))
            out.wildcard.insert(rule.substr(2));
          else
            out.exact.insert(rule);
        }
        return out;
      }();
      return r;
    }

    std::string lower(std::string s)
    {
      std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) {
        return char(std::tolower(c));
      });
      return s;
    }

    /// Number of labels in the public suffix of `labels`.
    std::size_t suffix_labels(const std::vector<std::string>& labels)
    {
      const auto& r = rules();
      std::size_t best = 1;
      // Candidate suffixes from shortest to longest.
      std::string suffix;
      for (std::size_t n = 1; n <= labels.size(); ++n)
      {
        const auto& label = labels[labels.size() - n];
        suffix = n == 1 ? label : label + "." + suffix;
        if (r.exception.count(suffix))
          return n - 1;
        if (r.exact.count(suffix))
          best = std::max(best, n);
        if (n < labels.size() && r.wildcard.count(suffix))
        {
          auto child = labels[labels.size() - n - 1] + "." + suffix;
          if (!r.exception.count(child))
            best = std::max(best, n + 1);
        }
      }
      return best;
    }

    std::vector<std::string> lowered(const DomainName& name)
    {
      std::vector<std::string> out;
      for (const auto& l : name.labels())
        out.push_back(lower(l));
      return out;
    }
  }

  DomainName public_suffix(const DomainName& name)
  {
    auto labels = lowered(name);
    if (labels.empty())
      return name;
    auto n = suffix_labels(labels);
    return DomainName::from_labels(std::vector<std::string>(labels.end() - std::ptrdiff_t(n), labels.end()));
  }

  std::optional<DomainName> registrable_domain(const DomainName& name)
  {
    auto labels = lowered(name);
    if (labels.empty())
      return std::nullopt;
    auto n = suffix_labels(labels);
    if (n >= labels.size())
      return std::nullopt;
    return DomainName::from_labels(std::vector<std::string>(labels.end() - std::ptrdiff_t(n + 1), labels.end()));
  }
}
