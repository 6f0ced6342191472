// Copyright (c) httpsrr contributors. All rights reserved.
// Licensed under the Apache 2.0 License.

#include "httpsrr/name.hpp"

#include <algorithm>
#include <cctype>
#include <fmt/format.h>

namespace httpsrr
{
  namespace
  {
    char lower(char c)
    {
      return (c >= 'A' && c <= 'Z') ? char(c - 'A' + 'a') : c;
    }

    void check_lengths(const std::vector<std::string>& labels, std::size_t pos)
    {
      std::size_t wire = 1;
      for (const auto& l : labels)
      {
        if (l.empty())
        {
          throw ParseError(ErrorCode::syntax, pos, "empty label");
        }
        if (l.size() > DomainName::max_label)
        {
          throw ParseError(
            ErrorCode::malformed_value,
            pos,
            fmt::format("label of {} bytes exceeds 63", l.size()));
        }
        wire += 1 + l.size();
      }
      if (wire > DomainName::max_wire)
      {
        throw ParseError(
          ErrorCode::malformed_value,
          pos,
          fmt::format("name of {} wire bytes exceeds 255", wire));
      }
    }

    bool needs_escape(unsigned char c)
    {
      switch (c)
      {
        case '.':
        case '\\':
        case '"':
        case '(':
        case ')':
        case ';':
        case '@':
        case '$':
          return true;
        default:
          return false;
      }
    }
  }

  DomainName DomainName::parse(std::string_view text)
  {
    if (text.empty())
    {
      throw ParseError(ErrorCode::syntax, 0, "empty domain name");
    }
    if (text == ".")
    {
      return DomainName();
    }

    std::vector<std::string> labels;
    std::string current;
    bool trailing_dot = false;
    for (std::size_t i = 0; i < text.size(); ++i)
    {
      char c = text[i];
      trailing_dot = false;
      if (c == '\\')
      {
        if (i + 1 >= text.size())
        {
          throw ParseError(ErrorCode::syntax, i, "dangling escape in name");
        }
        if (std::isdigit(static_cast<unsigned char>(text[i + 1])))
        {
          if (
            i + 3 >= text.size() ||
            !std::isdigit(static_cast<unsigned char>(text[i + 2])) ||
            !std::isdigit(static_cast<unsigned char>(text[i + 3])))
          {
            throw ParseError(ErrorCode::syntax, i, "bad \\DDD escape in name");
          }
          int v = (text[i + 1] - '0') * 100 + (text[i + 2] - '0') * 10 +
            (text[i + 3] - '0');
          if (v > 255)
          {
            throw ParseError(ErrorCode::syntax, i, "\\DDD escape above 255");
          }
          current.push_back(lower(char(v)));
          i += 3;
        }
        else
        {
          current.push_back(lower(text[i + 1]));
          i += 1;
        }
      }
      else if (c == '.')
      {
        if (current.empty())
        {
          throw ParseError(ErrorCode::syntax, i, "empty label");
        }
        labels.push_back(std::move(current));
        current.clear();
        trailing_dot = true;
      }
      else if (std::isspace(static_cast<unsigned char>(c)))
      {
        throw ParseError(ErrorCode::syntax, i, "whitespace in name");
      }
      else
      {
        current.push_back(lower(c));
      }
    }
    if (!trailing_dot)
    {
      labels.push_back(std::move(current));
    }
    check_lengths(labels, 0);
    return DomainName(std::move(labels));
  }

  DomainName DomainName::from_labels(std::vector<std::string> labels)
  {
    for (auto& l : labels)
    {
      std::transform(l.begin(), l.end(), l.begin(), lower);
    }
    check_lengths(labels, 0);
    return DomainName(std::move(labels));
  }

  DomainName DomainName::from_wire(ByteReader& in)
  {
    std::vector<std::string> labels;
    std::size_t start = in.offset();
    std::size_t wire = 0;
    while (true)
    {
      auto pos = in.offset();
      auto len = in.u8();
      ++wire;
      if (len == 0)
        break;
      if (len > max_label)
      {
        throw ParseError(
          ErrorCode::malformed_value,
          pos,
          (len & 0xc0) == 0xc0 ? "compressed name where uncompressed required" :
                                 "label length above 63");
      }
      auto raw = in.take(len);
      wire += len;
      if (wire > max_wire)
      {
        throw ParseError(ErrorCode::malformed_value, start, "name exceeds 255 bytes");
      }
      std::string label(raw.begin(), raw.end());
      std::transform(label.begin(), label.end(), label.begin(), lower);
      labels.push_back(std::move(label));
    }
    return DomainName(std::move(labels));
  }

  std::string DomainName::to_string() const
  {
    if (labels_.empty())
      return ".";
    std::string out;
    for (const auto& l : labels_)
    {
      for (unsigned char c : l)
      {
        if (c < 0x21 || c > 0x7e)
        {
          out += fmt::format("\\{:03d}", int(c));
        }
        else if (needs_escape(c))
        {
          out.push_back('\\');
          out.push_back(char(c));
        }
        else
        {
          out.push_back(char(c));
        }
      }
      out.push_back('.');
    }
    return out;
  }

  void DomainName::to_wire(ByteWriter& out) const
  {
    for (const auto& l : labels_)
    {
      out.u8(std::uint8_t(l.size()));
      out.bytes(std::string_view(l));
    }
    out.u8(0);
  }

  std::size_t DomainName::wire_length() const noexcept
  {
    std::size_t n = 1;
    for (const auto& l : labels_)
      n += 1 + l.size();
    return n;
  }

  bool DomainName::is_subdomain_of(const DomainName& other) const noexcept
  {
    if (other.labels_.size() > labels_.size())
      return false;
    return std::equal(
      other.labels_.rbegin(), other.labels_.rend(), labels_.rbegin());
  }

  bool DomainName::ends_with(std::string_view suffix_text) const
  {
    return is_subdomain_of(DomainName::parse(suffix_text));
  }

  DomainName DomainName::parent() const
  {
    if (labels_.empty())
      return *this;
    return DomainName(std::vector<std::string>(labels_.begin() + 1, labels_.end()));
  }

  DomainName DomainName::prepend(std::string_view label) const
  {
    std::vector<std::string> out;
    out.reserve(labels_.size() + 1);
    out.emplace_back(label);
    out.insert(out.end(), labels_.begin(), labels_.end());
    return from_labels(std::move(out));
  }
}
