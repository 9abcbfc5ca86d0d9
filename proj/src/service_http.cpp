#include <httplib.h>

#include "concore/service.hpp"

namespace concore {

void bind_routes(httplib::Server& server, Service& service) {
  auto handler = [&service](const httplib::Request& req, httplib::Response& res) {
    std::string target = req.path;
    if (auto it = req.params.find("source"); it != req.params.end()) target += "?source=" + it->second;
    const HttpResult r = service.dispatch(req.method, target, req.body);
    res.status = r.status;
    res.set_content(r.body, r.content_type);
  };
  server.Get(R"(/operators)", handler);
  server.Post(R"(/sessions)", handler);
  server.Post(R"(/sessions/[^/]+/turns)", handler);
  server.Get(R"(/sessions/[^/]+/state)", handler);
  server.Get(R"(/sessions/[^/]+/stats)", handler);
  server.Post(R"(/sessions/[^/]+/reactivate/[^/]+)", handler);
}

}  // namespace concore
