import { PortalClient } from "./api.js";
import { createApp } from "./app.js";

const root = document.getElementById("app");
if (!root) throw new Error("missing #app mount point");

// Served under /ui/, so API paths are absolute against the portal origin.
const app = createApp(root, new PortalClient(""));
void app.loadFeeds();
