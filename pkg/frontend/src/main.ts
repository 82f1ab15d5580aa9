// Browser entry point: connect to the serving host's /ws endpoint.

import { createApp } from "./app.js";

const root = document.getElementById("app");
if (root) {
  const scheme = location.protocol === "https:" ? "wss" : "ws";
  createApp(root, {
    url: `${scheme}://${location.host}/ws`,
    socketFactory: (url) => new WebSocket(url) as never,
  });
}
