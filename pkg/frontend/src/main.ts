import { ApiClient } from "./api.js";
import { createApp } from "./app.js";

document.addEventListener("DOMContentLoaded", () => {
  const api = new ApiClient((input, init) => fetch(input, init), "");
  createApp(document, api);
});
