import { Client } from "./api.js";
import { createApp } from "./app.js";

window.addEventListener("DOMContentLoaded", () => {
  const root = document.getElementById("app");
  if (!root) {
    throw new Error("missing #app mount point");
  }
  void createApp(root, new Client("")).start();
});
