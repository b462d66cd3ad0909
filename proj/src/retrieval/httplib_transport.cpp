#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "revmetrics/error.hpp"
#include "revmetrics/retrieval/transport.hpp"

namespace revmetrics::retrieval {

HttplibTransport::HttplibTransport(std::chrono::seconds timeout) : timeout_(timeout) {}

HttpResponse HttplibTransport::send(const HttpRequest &request) {
    const UrlParts parts = split_url(request.url);
    httplib::Client client(parts.scheme + "://" + parts.host + ":" + std::to_string(parts.port));
    client.set_connection_timeout(timeout_);
    client.set_read_timeout(timeout_);
    client.set_follow_location(true);

    httplib::Headers headers;
    std::string content_type = "application/json";
    for (const auto &[name, value] : request.headers) {
        if (name == "Content-Type")
            content_type = value;
        else
            headers.emplace(name, value);
    }

    httplib::Result result = request.method == "POST"
                                 ? client.Post(parts.path_and_query, headers, request.body, content_type)
                                 : client.Get(parts.path_and_query, headers);
    if (!result)
        throw Error(ErrorKind::NetworkError, request.method + " " + request.url + ": " + httplib::to_string(result.error()));
    return HttpResponse{result->status, result->body};
}

} // namespace revmetrics::retrieval
